// quadrature.hpp — Adaptive Gauss–Kronrod integration

#pragma once

#include <functional>
#include <vector>

namespace sbnm::quad {

struct Result {
    double value{0.0};
    double error{0.0};       // accumulated error estimate
    int intervals{0};        // panels used
    bool converged{true};
};

struct Options {
    double rel_tol{1e-8};
    double abs_tol{0.0};
    int max_intervals{200000};
    // Initial panel edges (ascending, within [a,b]); the driver refines from these.
    std::vector<double> initial_edges{};
    // If false, a non-converged integral returns converged=false instead of throwing.
    bool throw_on_failure{true};
};

// 15-point Gauss–Kronrod on [a,b]; error from the embedded 7-point Gauss rule.
void gk15(const std::function<double(double)>& f, double a, double b,
          double& value, double& error);

// Globally adaptive bisection driver (QUADPACK-style worst-interval refinement).
Result integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& opts = {});

// Principal value of ∫ f(w)/(w-c) dw over [a,b] with c inside: symmetric
// excision of half-width `eps` around c plus the analytic odd-part cancellation,
// extrapolated over shrinking eps. f must be smooth at c.
double principal_value(const std::function<double(double)>& f, double a, double b,
                       double c, const Options& opts = {});

// Edges {a, a+w, a+2w, ..., b} with w <= max_width (at least one panel).
std::vector<double> uniform_edges(double a, double b, double max_width);

} // namespace sbnm::quad
