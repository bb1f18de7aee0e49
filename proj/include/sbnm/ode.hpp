// ode.hpp — Adaptive Dormand–Prince 5(4) integrator with dense output

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "sbnm/errors.hpp"

namespace sbnm::ode {

struct StepControl {
    double rel_tol{1e-9};
    double abs_tol{1e-12};
    double max_step{0.1};
    double initial_step{0.0};  // 0 → max_step/100
};

// Integrates y' = f(t, y) from t0 to t1 and evaluates the order-4 continuous
// extension at the (sorted, within [t0, t1]) output times. The observer is
// called once per output time, in order.
template <std::size_t N, typename RHS, typename Obs>
void integrate(RHS&& f, double t0, std::array<double, N> y, double t1, const StepControl& ctl,
               const std::vector<double>& out_times, Obs&& observer) {
    using Vec = std::array<double, N>;

    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                     e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                     e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
    // dense-output weights (Hairer, DOPRI5)
    constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                     d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                     d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

    Vec k1, k2, k3, k4, k5, k6, k7, ytmp, ynew;
    double t = t0;
    double h = ctl.initial_step > 0 ? ctl.initial_step : ctl.max_step / 100.0;
    h = std::min(h, ctl.max_step);
    f(t, y, k1);
    std::size_t next_out = 0;
    while (next_out < out_times.size() && out_times[next_out] <= t0) {
        observer(out_times[next_out], y);
        ++next_out;
    }

    const double tiny = 1e-14 * (std::abs(t1 - t0) + 1.0);
    while (t < t1 - tiny) {
        h = std::min({h, ctl.max_step, t1 - t});
        if (h < 1e-14 * (std::abs(t) + 1.0))
            throw NumericalError("ODE step size underflow at t = " + std::to_string(t));

        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        f(t + c2 * h, ytmp, k2);
        for (std::size_t i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        f(t + c3 * h, ytmp, k3);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        f(t + c4 * h, ytmp, k4);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        f(t + c5 * h, ytmp, k5);
        for (std::size_t i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        f(t + h, ytmp, k6);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        f(t + h, ynew, k7);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                   e7 * k7[i]);
            const double sc = ctl.abs_tol + ctl.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err += (ei / sc) * (ei / sc);
        }
        err = std::sqrt(err / N);

        if (err <= 1.0) {
            while (next_out < out_times.size() && out_times[next_out] <= t + h + tiny) {
                const double th = std::clamp((out_times[next_out] - t) / h, 0.0, 1.0);
                Vec yo;
                for (std::size_t i = 0; i < N; ++i) {
                    const double dy = ynew[i] - y[i];
                    const double r3 = h * k1[i] - dy;
                    const double r4 = dy - h * k7[i] - r3;
                    const double r5 = h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] +
                                           d6 * k6[i] + d7 * k7[i]);
                    yo[i] = y[i] + th * (dy + (1 - th) * (r3 + th * (r4 + (1 - th) * r5)));
                }
                observer(out_times[next_out], yo);
                ++next_out;
            }
            t += h;
            y = ynew;
            k1 = k7;  // FSAL
        }
        const double fac = err > 0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(fac, 0.2, 5.0);
    }
    while (next_out < out_times.size()) {
        observer(out_times[next_out], y);
        ++next_out;
    }
}

} // namespace sbnm::ode
