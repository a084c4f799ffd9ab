#pragma once

// Closed forms for the free-clamped beam y'''' = lambda y on [0,1]
// (y'' = y''' = 0 at x = 0, y = y' = 0 at x = 1), rho = lambda^{1/4}.
// Written against the textbook formulas only; nothing from the library.

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

inline cplx rho_of(cplx lambda) { return std::pow(lambda, 0.25); }

inline cplx delta22(cplx l) {
    const cplx r = rho_of(l);
    return -(1.0 + std::cosh(r) * std::cos(r)) / 2.0;
}
inline cplx delta32(cplx l) {
    const cplx r = rho_of(l);
    return (std::cosh(r) * std::sin(r) - std::cos(r) * std::sinh(r)) / (2.0 * r * r * r);
}
inline cplx delta42(cplx l) {
    const cplx r = rho_of(l);
    return -std::sinh(r) * std::sin(r) / (2.0 * r * r);
}
inline cplx delta33(cplx l) {
    const cplx r = rho_of(l);
    return (std::sinh(r) + std::sin(r)) / (2.0 * r);
}
inline cplx delta43(cplx l) {
    const cplx r = rho_of(l);
    return (std::cosh(r) + std::cos(r)) / 2.0;
}
inline cplx m43(cplx l) {
    const cplx r = rho_of(l);
    return -r * (std::cosh(r) + std::cos(r)) / (std::sinh(r) + std::sin(r));
}
inline cplx m32(cplx l) { return -delta32(l) / delta22(l); }

inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Roots of 1 + cos(rho) cosh(rho), written as cos(rho) + sech(rho) to stay bounded.
inline double eigen_rho(int n) {
    auto f = [](double r) { return std::cos(r) + 1.0 / std::cosh(r); };
    const double c = (n - 0.5) * M_PI;
    return bisect(f, c - 0.4 * M_PI, c + 0.4 * M_PI);
}
inline double eigenvalue(int n) { return std::pow(eigen_rho(n), 4); }

// Delta_33 zeros: tan s = -tanh s, lambda = -4 s^4.
inline double delta33_zero(int n) {
    auto f = [](double s) { return std::sin(s) + std::tanh(s) * std::cos(s); };
    const double c = (n - 0.25) * M_PI;
    return -4.0 * std::pow(bisect(f, c - 0.4 * M_PI, c + 0.4 * M_PI), 4);
}

// Mode shape with the free end at x = 0, value 2 there before normalisation.
struct Mode {
    double rho, sigma;
    double y(double x) const {
        const double r = rho * x;
        return std::cosh(r) + std::cos(r) - sigma * (std::sinh(r) + std::sin(r));
    }
    double dy0() const { return -2.0 * sigma * rho; }
};
inline Mode mode(int n) {
    const double r = eigen_rho(n);
    return {r, (std::cosh(r) + std::cos(r)) / (std::sinh(r) + std::sin(r))};
}

// Composite Simpson on [0,1]; y is evaluated in long double to keep the
// cancellation in cosh - sigma sinh under control.
inline double mode_norm2(const Mode& m, int panels = 20000) {
    auto y = [&](long double x) {
        const long double r = m.rho * x;
        return std::cosh(r) + std::cos(r) - (long double)m.sigma * (std::sinh(r) + std::sin(r));
    };
    long double s = 0;
    const long double h = 1.0L / panels;
    for (int i = 0; i <= panels; ++i) {
        const long double v = y(i * h);
        const int w = (i == 0 || i == panels) ? 1 : (i % 2 ? 4 : 2);
        s += w * v * v;
    }
    return static_cast<double>(s * h / 3.0L);
}

// gamma_n, xi_n of the normalised mode with gamma_n > 0.
inline std::pair<double, double> weights(int n) {
    const Mode m = mode(n);
    const double s = std::sqrt(mode_norm2(m));
    return {2.0 / s, m.dy0() / s};
}

} // namespace oracle
