#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace rems {

using cplx = std::complex<double>;

inline constexpr double pi = 3.141592653589793238462643383279502884;

// 2019 SI exact / CODATA values.
inline constexpr double mu0 = 1.25663706212e-6;   // H/m
inline constexpr double eps0 = 8.8541878128e-12;  // F/m

struct DegenerateNetwork : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IllConditionedInterconnect : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnphysicalSwitchModel : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ResonantModel : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ActiveOrInconsistentModel : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateExcitation : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Single-frequency free-space quantities plus the real reference
/// resistance used for all power-wave normalizations.
struct WaveContext {
    double f;       // Hz
    double k;       // rad/m
    double lambda;  // m
    double Z0;      // ohm, free-space impedance
    double R0;      // ohm, reference resistance

    static WaveContext at(double f_hz, double r0 = 50.0) {
        if (!(f_hz > 0.0)) throw std::invalid_argument("frequency must be > 0");
        if (!(r0 > 0.0)) throw std::invalid_argument("reference resistance must be > 0");
        WaveContext c;
        c.f = f_hz;
        c.k = 2.0 * pi * f_hz * std::sqrt(mu0 * eps0);
        c.lambda = 1.0 / (std::sqrt(mu0 * eps0) * f_hz);
        c.Z0 = std::sqrt(mu0 / eps0);
        c.R0 = r0;
        return c;
    }
};

struct PortSpec {
    cplx zref{50.0, 0.0};
    std::string label;

    PortSpec() = default;
    explicit PortSpec(cplx z, std::string lbl = {}) : zref(z), label(std::move(lbl)) {
        if (!(zref.real() > 0.0))
            throw std::invalid_argument("port reference impedance must have positive real part");
    }
};

}  // namespace rems
