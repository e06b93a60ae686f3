#pragma once

#include <complex>

namespace mvups {

using Phasor = std::complex<double>;

double sat(double x, double lo, double hi);

// Asymmetric rate-limited first-order filter for the grid draw reference.
struct ShapingFilter {
    double tau = 0.0135;
    double rate_up = 0.2;
    double rate_down = 10.0;
    double state = 0.0;

    double step(double target, double dt);
};

// First-order lag with ramp limit (BESS power path).
struct LagRampPath {
    double tau = 0.02;
    double rate = 5.0;
    double state = 0.0;

    double step(double cmd, double dt);
};

// PI on a complex error with per-component integrator clamp.
struct PiRegulator {
    double kp = 0.3;
    double ki = 20.0;
    double xi_lim = 0.08;
    Phasor xi{0.0, 0.0};

    Phasor step(Phasor err, double dt);
    Phasor output(Phasor err) const;
    void reset() { xi = {0.0, 0.0}; }
};

// Proportional droop with symmetric saturation.
struct DroopLaw {
    double gain = 20.0;
    double cap = 0.02;

    double operator()(double x) const;
};

}  // namespace mvups
