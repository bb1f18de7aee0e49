// dynamics.hpp — Qubit state evolution under the full, RWA, and SA master equations

#pragma once

#include <array>
#include <complex>
#include <vector>

#include "sbnm/spectral.hpp"

namespace sbnm::dynamics {

// Two-level state in Bloch representation; rho = (I + λ·σ)/2.
struct QubitState {
    double lx{0}, ly{0}, lz{0};

    static QubitState from_bloch(double lx, double ly, double lz);
    static QubitState excited() { return {0, 0, 1}; }
    static QubitState ground() { return {0, 0, -1}; }
    // equatorial pure state (cos(ξ/2), sin(ξ/2), 0)
    static QubitState equatorial(double xi);
    static QubitState from_density(double rho11, std::complex<double> rho10);

    double rho11() const { return 0.5 * (1 + lz); }
    double rho00() const { return 0.5 * (1 - lz); }
    std::complex<double> rho10() const { return {0.5 * lx, -0.5 * ly}; }
    std::complex<double> rho01() const { return {0.5 * lx, 0.5 * ly}; }
    double norm() const;

    // ‖λ‖ ≤ 1 + tol, which for a Bloch-represented state is Hermiticity,
    // unit trace and positivity combined.
    void validate(double tol = 1e-9) const;
};

enum class Engine { FullBloch, FullClosed, RWA, SA };

struct EvolutionConfig {
    Engine engine{Engine::FullClosed};
    double t_max{0};
    double rel_tol{1e-9};
    double abs_tol{1e-12};
    double max_step{0};           // 0 → min(tau_s, tau_c)/40
    int stride{10};               // output every `stride` accepted steps…
    std::vector<double> output_times;  // …unless explicit output times are given

    void validate(const spectral::CoefficientSet& coeffs) const;
};

struct TimedState {
    double t{0};
    QubitState state;
};

// Dynamical-map data at one time: ρ(t) follows from (Γ, u, v₁, v₂) for any ρ(0).
struct MapState {
    double t{0};
    std::complex<double> Gamma{0};
    double u{0};
    std::complex<double> v1{1}, v2{0};
};

struct ClosedEvolution {
    std::vector<TimedState> states;
    std::vector<MapState> map;
};

// Equations of motion for the Bloch vector, integrated directly.
std::vector<TimedState> evolve_full_bloch(const spectral::CoefficientSet& coeffs,
                                          const QubitState& rho0, const EvolutionConfig& cfg);

// Closed-form map route: integrates the (v1, v2, u) system once and assembles
// ρ(t) for the given initial state; also returns the MapState trajectory.
ClosedEvolution evolve_full_closed(const spectral::CoefficientSet& coeffs, const QubitState& rho0,
                                   const EvolutionConfig& cfg);

// Map trajectory only (no initial state needed).
std::vector<MapState> evolve_map(const spectral::CoefficientSet& coeffs, const EvolutionConfig& cfg);

// Assemble ρ(t) from the map data and an initial state.
QubitState apply_map_state(const MapState& ms, const QubitState& rho0);

std::vector<TimedState> evolve_rwa(const spectral::CoefficientSet& coeffs, const QubitState& rho0,
                                   const EvolutionConfig& cfg);
std::vector<TimedState> evolve_sa(const spectral::CoefficientSet& coeffs, const QubitState& rho0,
                                  const EvolutionConfig& cfg);

// Dispatch on cfg.engine (FullClosed for the map-based engines).
std::vector<TimedState> evolve(const spectral::CoefficientSet& coeffs, const QubitState& rho0,
                               const EvolutionConfig& cfg);

struct DeltaPoint {
    double t{0};
    std::array<double, 3> dl{0, 0, 0};
    double norm() const;
};

// Pointwise Bloch-vector difference of two trajectories on equal grids.
std::vector<DeltaPoint> pair_difference(const std::vector<TimedState>& a,
                                        const std::vector<TimedState>& b);

} // namespace sbnm::dynamics
