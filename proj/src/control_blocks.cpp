#include "mvups/control_blocks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mvups {

double sat(double x, double lo, double hi) {
    if (lo > hi) throw std::invalid_argument("sat: lo > hi");
    return std::min(std::max(x, lo), hi);
}

double ShapingFilter::step(double target, double dt) {
    if (!std::isfinite(target)) throw std::domain_error("shaping filter: non-finite target");
    double rate = (target - state) / tau;
    rate = sat(rate, -rate_down, rate_up);
    state += rate * dt;
    return state;
}

double LagRampPath::step(double cmd, double dt) {
    if (!std::isfinite(cmd)) throw std::domain_error("lag-ramp path: non-finite command");
    state += sat((cmd - state) / tau, -rate, rate) * dt;
    return state;
}

Phasor PiRegulator::output(Phasor err) const {
    Phasor xs{sat(xi.real(), -xi_lim, xi_lim), sat(xi.imag(), -xi_lim, xi_lim)};
    return kp * err + ki * xs;
}

Phasor PiRegulator::step(Phasor err, double dt) {
    xi += err * dt;
    xi = {sat(xi.real(), -xi_lim, xi_lim), sat(xi.imag(), -xi_lim, xi_lim)};
    return output(err);
}

double DroopLaw::operator()(double x) const {
    return sat(-gain * x, -cap, cap);
}

}  // namespace mvups
