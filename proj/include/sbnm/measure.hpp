// measure.hpp — Trace distance, σ(t), and the trace-distance non-Markovianity measure

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <utility>
#include <vector>

#include "sbnm/dynamics.hpp"
#include "sbnm/spectral.hpp"

namespace sbnm::measure {

// ½‖ρ₁−ρ₂‖₁; for qubits ½‖δλ‖.
double trace_distance(const dynamics::QubitState& a, const dynamics::QubitState& b);
// Same quantity from the eigenvalues of ρ₁−ρ₂ (general-purpose route, kept as oracle).
double trace_distance_eigen(const dynamics::QubitState& a, const dynamics::QubitState& b);

struct GrowthInterval {
    double a{0}, b{0};  // σ > 0 on (a, b)
    double gain{0};     // D(b) − D(a)
};

struct SigmaTrace {
    std::vector<double> t;
    std::vector<double> D;
    std::vector<double> sigma;
    std::vector<GrowthInterval> growth;
    double total_gain{0};
};

// D(t) and σ = dD/dt for a trajectory pair on a common uniform grid. When
// coefficients are supplied, σ uses the exact Bloch expression for the given
// engine; otherwise 4th-order central differences. Grid steps above π/(10 ω_A)
// are rejected.
SigmaTrace sigma_series(const std::vector<dynamics::TimedState>& a,
                        const std::vector<dynamics::TimedState>& b,
                        const spectral::CoefficientSet* coeffs = nullptr,
                        dynamics::Engine engine = dynamics::Engine::FullClosed);

struct AnalyticMeasure {
    double nu{0}, mu{0}, theta_inf{0};
    double gr_inf{0}, gi_inf{0};
    double omega_a{1};
    double tau_r{0};
    double eps{0};  // 1/(2 τ_r [ω_A − g_i(∞)])
};

AnalyticMeasure analytic_measure(const spectral::CoefficientSet& coeffs);

// (e^{−t/τ_r}/τ_r){μ cos[2ω_A t + ξ(t) + θ(∞)] − 1}, ξ(t) = ξ(0) − 2 g_i(∞) t
double sigma_perp_ana(const AnalyticMeasure& am, double xi0, double t);

// (ν − arctan ν)/π
double n_ana(const AnalyticMeasure& am);
// with the first-order ε correction {1 + [π + θ(∞) + ξ(0)]ε}
double n_ana_corrected(const AnalyticMeasure& am, double xi0);
// (1 − e^{−T/τ_r}) N^ana
double n_ana_finite_T(const AnalyticMeasure& am, double T);

// σ⊥ᵃⁿᵃ > 0 windows (tₙ⁻, tₙ⁺); empty when μ ≤ 1; negative times discarded.
std::vector<std::pair<double, double>> positivity_windows(const AnalyticMeasure& am, double xi0,
                                                          int n_max);

// Closed-form measures for the approximate master equations.
double n_rwa_closed(const spectral::CoefficientSet& coeffs);
double n_sa_closed(const spectral::CoefficientSet& coeffs);

struct MeasureConfig {
    double horizon_tau_r{10};
    double horizon_override{0};  // explicit T (takes precedence when > 0)
    double grid_step{0};         // 0 → π/(40 ω_A)
    int polar_points{13};
    int azimuth_points{24};
    double xi_tol{1e-3};         // refinement stop on |Δξ(0)|
    double fixed_xi0{std::numeric_limits<double>::quiet_NaN()};  // pin the equatorial pair
    int workers{1};
    int random_restarts{0};
    unsigned long long seed{0};
    double ode_rel_tol{1e-9};
    double ode_abs_tol{1e-12};
};

struct MeasureResult {
    double N{0};
    std::array<double, 3> lambda0{0, 0, 0};  // optimizing λ¹(0); λ²(0) = −λ¹(0)
    double xi0{0};
    dynamics::Engine engine{dynamics::Engine::FullClosed};
    double T{0};
    double residual_estimate{0};  // e^{−T/τ_r} N^ana tail (full engine)
    std::vector<GrowthInterval> intervals;
    double nu{0}, mu{0}, N_ana{0};
};

// Total trace-distance gain, maximized over antipodal
// pure initial pairs (coarse hemisphere grid, then golden-section refinement).
MeasureResult nonmarkovianity(dynamics::Engine engine, const spectral::CoefficientSet& coeffs,
                              const MeasureConfig& cfg = {});

} // namespace sbnm::measure
