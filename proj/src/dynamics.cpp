#include "sbnm/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "sbnm/errors.hpp"
#include "sbnm/ode.hpp"

namespace sbnm::dynamics {

using spectral::CoefficientSet;

QubitState QubitState::from_bloch(double lx, double ly, double lz) {
    QubitState s{lx, ly, lz};
    s.validate();
    return s;
}

QubitState QubitState::equatorial(double xi) {
    return {std::cos(xi / 2), std::sin(xi / 2), 0.0};
}

QubitState QubitState::from_density(double rho11, std::complex<double> rho10) {
    QubitState s{2 * rho10.real(), -2 * rho10.imag(), 2 * rho11 - 1};
    s.validate();
    return s;
}

double QubitState::norm() const { return std::sqrt(lx * lx + ly * ly + lz * lz); }

void QubitState::validate(double tol) const {
    if (!std::isfinite(lx) || !std::isfinite(ly) || !std::isfinite(lz))
        throw ValidationError("Bloch vector has non-finite components");
    if (norm() > 1.0 + tol)
        throw ValidationError("Bloch vector leaves the unit ball: |lambda| = " +
                              std::to_string(norm()));
}

void EvolutionConfig::validate(const CoefficientSet& coeffs) const {
    if (!(t_max > 0)) throw ValidationError("EvolutionConfig: t_max must be positive");
    if (t_max > coeffs.horizon() * (1 + 1e-12))
        throw ValidationError("EvolutionConfig: t_max exceeds the coefficient horizon (grid exhausted)");
    const auto& m = coeffs.model();
    const double step_cap = std::min(1.0 / m.omega_a, m.tau_c()) / 40.0;
    if (max_step > step_cap * (1 + 1e-12))
        throw ValidationError("EvolutionConfig: max_step above min(tau_s, tau_c)/40");
    for (double t : output_times)
        if (t < 0 || t > t_max * (1 + 1e-12))
            throw ValidationError("EvolutionConfig: output time outside [0, t_max]");
}

namespace {

double default_max_step(const CoefficientSet& coeffs) {
    const auto& m = coeffs.model();
    return std::min(1.0 / m.omega_a, m.tau_c()) / 40.0;
}

ode::StepControl step_control(const CoefficientSet& coeffs, const EvolutionConfig& cfg) {
    ode::StepControl ctl;
    ctl.rel_tol = cfg.rel_tol;
    ctl.abs_tol = cfg.abs_tol;
    ctl.max_step = cfg.max_step > 0 ? cfg.max_step : default_max_step(coeffs);
    return ctl;
}

std::vector<double> output_grid(const EvolutionConfig& cfg, const CoefficientSet& coeffs) {
    if (!cfg.output_times.empty()) {
        auto ts = cfg.output_times;
        std::sort(ts.begin(), ts.end());
        return ts;
    }
    // stride in units of the controller max step gives a uniform default grid
    const double step = (cfg.max_step > 0 ? cfg.max_step : default_max_step(coeffs)) * cfg.stride;
    std::vector<double> ts;
    ts.reserve(static_cast<std::size_t>(cfg.t_max / step) + 2);
    for (double t = 0.0; t < cfg.t_max; t += step) ts.push_back(t);
    ts.push_back(cfg.t_max);
    return ts;
}

} // namespace

std::vector<TimedState> evolve_full_bloch(const CoefficientSet& coeffs, const QubitState& rho0,
                                          const EvolutionConfig& cfg) {
    cfg.validate(coeffs);
    rho0.validate();
    const double wa = coeffs.model().omega_a;
    auto rhs = [&](double t, const std::array<double, 3>& l, std::array<double, 3>& dl) {
        const std::complex<double> g = coeffs.g(t);
        const double ph = 2 * wa * t;
        const double Rc = g.real() * std::cos(ph) - g.imag() * std::sin(ph);  // Re[g e^{2iωt}]
        const double Rs = g.real() * std::sin(ph) + g.imag() * std::cos(ph);  // Im[g e^{2iωt}]
        const double gr = g.real(), gi = g.imag();
        dl[0] = (-gr + Rc) * l[0] + (gi - Rs) * l[1];
        dl[1] = -(gi + Rs) * l[0] - (gr + Rc) * l[1];
        dl[2] = (coeffs.f_plus(t) - coeffs.f_minus(t)) - 2 * gr * l[2];
    };
    std::vector<TimedState> out;
    const auto ts = output_grid(cfg, coeffs);
    out.reserve(ts.size());
    ode::integrate<3>(rhs, 0.0, {rho0.lx, rho0.ly, rho0.lz}, cfg.t_max, step_control(coeffs, cfg),
                      ts, [&](double t, const std::array<double, 3>& y) {
                          out.push_back({t, QubitState{y[0], y[1], y[2]}});
                      });
    return out;
}

std::vector<MapState> evolve_map(const CoefficientSet& coeffs, const EvolutionConfig& cfg) {
    cfg.validate(coeffs);
    const double wa = coeffs.model().omega_a;
    // state: (Re v1, Im v1, Re v2, Im v2, u)
    auto rhs = [&](double t, const std::array<double, 5>& y, std::array<double, 5>& dy) {
        const std::complex<double> v1{y[0], y[1]}, v2{y[2], y[3]};
        const std::complex<double> g = coeffs.g(t);
        const double phase = 2 * wa * t - coeffs.big_gamma(t).imag();
        const std::complex<double> e{std::cos(phase), std::sin(phase)};
        const std::complex<double> dv1 = g * e * std::conj(v2);
        const std::complex<double> dv2 = g * e * std::conj(v1);
        dy[0] = dv1.real();
        dy[1] = dv1.imag();
        dy[2] = dv2.real();
        dy[3] = dv2.imag();
        dy[4] = (coeffs.f_plus(t) - coeffs.f_minus(t)) - 2 * coeffs.g_r(t) * y[4];
    };
    std::vector<MapState> out;
    const auto ts = output_grid(cfg, coeffs);
    out.reserve(ts.size());
    ode::integrate<5>(rhs, 0.0, {1, 0, 0, 0, 0}, cfg.t_max, step_control(coeffs, cfg), ts,
                      [&](double t, const std::array<double, 5>& y) {
                          out.push_back({t, coeffs.big_gamma(t), y[4],
                                         {y[0], y[1]}, {y[2], y[3]}});
                      });
    return out;
}

QubitState apply_map_state(const MapState& ms, const QubitState& rho0) {
    const double egr = std::exp(-ms.Gamma.real());
    const double lz = ms.u + egr * rho0.lz;
    const std::complex<double> decay = std::exp(-0.5 * std::conj(ms.Gamma));
    const std::complex<double> r10 = decay * (ms.v1 * rho0.rho10() + ms.v2 * rho0.rho01());
    return {2 * r10.real(), -2 * r10.imag(), lz};
}

ClosedEvolution evolve_full_closed(const CoefficientSet& coeffs, const QubitState& rho0,
                                   const EvolutionConfig& cfg) {
    rho0.validate();
    ClosedEvolution ev;
    ev.map = evolve_map(coeffs, cfg);
    ev.states.reserve(ev.map.size());
    for (const auto& ms : ev.map) ev.states.push_back({ms.t, apply_map_state(ms, rho0)});
    return ev;
}

std::vector<TimedState> evolve_rwa(const CoefficientSet& coeffs, const QubitState& rho0,
                                   const EvolutionConfig& cfg) {
    cfg.validate(coeffs);
    rho0.validate();
    std::vector<TimedState> out;
    const auto ts = output_grid(cfg, coeffs);
    out.reserve(ts.size());
    const std::complex<double> r10_0 = rho0.rho10();
    for (double t : ts) {
        const double G = coeffs.gamma_rwa(t);
        const double lz = -1.0 + std::exp(-G) * (1.0 + rho0.lz);
        const double phi = coeffs.int_h(t);  // phase from the h(t)[σz,ρ]/2 term
        const std::complex<double> r10 =
            std::exp(-0.5 * G) * std::complex<double>(std::cos(phi), std::sin(phi)) * r10_0;
        out.push_back({t, QubitState{2 * r10.real(), -2 * r10.imag(), lz}});
    }
    return out;
}

std::vector<TimedState> evolve_sa(const CoefficientSet& coeffs, const QubitState& rho0,
                                  const EvolutionConfig& cfg) {
    cfg.validate(coeffs);
    rho0.validate();
    // populations follow the same u(t) equation as the full master equation
    auto rhs = [&](double t, const std::array<double, 1>& y, std::array<double, 1>& dy) {
        dy[0] = (coeffs.f_plus(t) - coeffs.f_minus(t)) - 2 * coeffs.g_r(t) * y[0];
    };
    std::vector<TimedState> out;
    const auto ts = output_grid(cfg, coeffs);
    out.reserve(ts.size());
    const std::complex<double> r10_0 = rho0.rho10();
    ode::integrate<1>(rhs, 0.0, {0.0}, cfg.t_max, step_control(coeffs, cfg), ts,
                      [&](double t, const std::array<double, 1>& y) {
                          const auto G = coeffs.big_gamma(t);
                          // secular-approximation coherences keep the g_i Lamb rotation
                          const std::complex<double> r10 = std::exp(-0.5 * std::conj(G)) * r10_0;
                          const double lz = y[0] + std::exp(-G.real()) * rho0.lz;
                          out.push_back({t, QubitState{2 * r10.real(), -2 * r10.imag(), lz}});
                      });
    return out;
}

std::vector<TimedState> evolve(const CoefficientSet& coeffs, const QubitState& rho0,
                               const EvolutionConfig& cfg) {
    switch (cfg.engine) {
        case Engine::FullBloch: return evolve_full_bloch(coeffs, rho0, cfg);
        case Engine::FullClosed: return evolve_full_closed(coeffs, rho0, cfg).states;
        case Engine::RWA: return evolve_rwa(coeffs, rho0, cfg);
        case Engine::SA: return evolve_sa(coeffs, rho0, cfg);
    }
    throw ValidationError("unknown engine");
}

double DeltaPoint::norm() const {
    return std::sqrt(dl[0] * dl[0] + dl[1] * dl[1] + dl[2] * dl[2]);
}

std::vector<DeltaPoint> pair_difference(const std::vector<TimedState>& a,
                                        const std::vector<TimedState>& b) {
    if (a.size() != b.size()) throw ValidationError("pair_difference: trajectory grids differ");
    std::vector<DeltaPoint> out;
    out.reserve(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a[i].t - b[i].t) > 1e-12 * (1 + std::abs(a[i].t)))
            throw ValidationError("pair_difference: trajectory grids differ");
        out.push_back({a[i].t,
                       {a[i].state.lx - b[i].state.lx, a[i].state.ly - b[i].state.ly,
                        a[i].state.lz - b[i].state.lz}});
    }
    return out;
}

} // namespace sbnm::dynamics
