// oracles.hpp — independent reference implementations used only by the tests

#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>

#include <gsl/gsl_sf_expint.h>

#include "sbnm/spectral.hpp"

namespace oracle {

// plain recursive adaptive Simpson, independent of the library quadrature
inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6 * (fa + 4 * flm + fm);
    const double right = (b - m) / 6 * (fm + 4 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15 * tol)
        return left + right + (left + right - whole) / 15;
    return simpson_rec(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int depth = 48) {
    if (!(a < b)) return 0.0;
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth);
}

// bath correlation kernels, written out independently of the library
inline double corr_Kc(const sbnm::spectral::SpectralModel& m, double s) {
    using sbnm::spectral::Family;
    const double pi = 3.14159265358979323846;
    switch (m.family) {
        case Family::Lorentzian: {
            const double w0 = m.omega_a - m.delta;
            return 0.5 * m.alpha * m.lambda * std::exp(-m.lambda * s) * std::cos(w0 * s);
        }
        case Family::Ohmic: {
            const double x = m.omega_c * s;
            double A;
            if (x < 1e-4) {
                const double L = 0.57721566490153286 + std::log(x);
                A = -L + x * x * (0.75 - 0.5 * L);
            } else {
                A = 0.5 * (gsl_sf_expint_E1_scaled(x) - gsl_sf_expint_Ei_scaled(x));
            }
            return (m.alpha / pi) * (m.omega_c * m.omega_c / m.omega_a) * A;
        }
        default: throw std::runtime_error("oracle: tabulated Kc not provided");
    }
}

inline double corr_Ks(const sbnm::spectral::SpectralModel& m, double s) {
    using sbnm::spectral::Family;
    switch (m.family) {
        case Family::Lorentzian: {
            const double w0 = m.omega_a - m.delta;
            return 0.5 * m.alpha * m.lambda * std::exp(-m.lambda * s) * std::sin(w0 * s);
        }
        case Family::Ohmic:
            return 0.5 * m.alpha * (m.omega_c * m.omega_c / m.omega_a) * std::exp(-m.omega_c * s);
        default: throw std::runtime_error("oracle: tabulated Ks not provided");
    }
}

// coefficients by s-domain adaptive Simpson over the exact kernels
inline double f_minus(const sbnm::spectral::SpectralModel& m, double t, double tol = 1e-13) {
    const double wa = m.omega_a;
    return adaptive_simpson(
        [&](double s) { return 2 * (corr_Kc(m, s) * std::cos(wa * s) + corr_Ks(m, s) * std::sin(wa * s)); },
        1e-12, t, tol);
}
inline double f_plus(const sbnm::spectral::SpectralModel& m, double t, double tol = 1e-13) {
    const double wa = m.omega_a;
    return adaptive_simpson(
        [&](double s) { return 2 * (corr_Kc(m, s) * std::cos(wa * s) - corr_Ks(m, s) * std::sin(wa * s)); },
        1e-12, t, tol);
}
inline double g_imag(const sbnm::spectral::SpectralModel& m, double t, double tol = 1e-13) {
    const double wa = m.omega_a;
    return adaptive_simpson([&](double s) { return -2 * corr_Kc(m, s) * std::sin(wa * s); }, 1e-12,
                            t, tol);
}
inline double h_coeff(const sbnm::spectral::SpectralModel& m, double t, double tol = 1e-13) {
    const double wa = m.omega_a;
    return adaptive_simpson(
        [&](double s) { return corr_Ks(m, s) * std::cos(wa * s) - corr_Kc(m, s) * std::sin(wa * s); },
        1e-12, t, tol);
}

} // namespace oracle
