#include "sbnm/measure.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "sbnm/errors.hpp"
#include "sbnm/parallel.hpp"
#include "sbnm/quadrature.hpp"

namespace sbnm::measure {

using dynamics::Engine;
using dynamics::QubitState;
using spectral::CoefficientSet;
using cplx = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

// cubic Hermite value at fraction th of a cell of width h (derivatives = σ)
double hermite(double d0, double d1, double s0, double s1, double th, double h) {
    const double h00 = (1 + 2 * th) * (1 - th) * (1 - th);
    const double h10 = th * (1 - th) * (1 - th);
    const double h01 = th * th * (3 - 2 * th);
    const double h11 = th * th * (th - 1);
    return h00 * d0 + h10 * h * s0 + h01 * d1 + h11 * h * s1;
}

struct Detection {
    std::vector<GrowthInterval> intervals;
    double total{0};
};

// Growth intervals of D from σ sign changes on a uniform grid; boundaries by
// linear σ roots, D at the boundary by Hermite interpolation (D' = σ).
Detection detect_growth(double t0, double h, const std::vector<double>& D,
                        const std::vector<double>& sigma) {
    Detection det;
    const std::size_t n = D.size();
    double lastD = D[0];
    double a_t = t0;
    double acc = 0, comp = 0;  // Kahan accumulation of gains
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const bool p0 = sigma[k] > 0, p1 = sigma[k + 1] > 0;
        if (p0 == p1) continue;
        const double frac = sigma[k] / (sigma[k] - sigma[k + 1]);
        const double troot = t0 + (k + frac) * h;
        const double droot = hermite(D[k], D[k + 1], sigma[k], sigma[k + 1], frac, h);
        if (p0) {  // growth ends
            const double gain = droot - lastD;
            if (gain > 0) {
                det.intervals.push_back({a_t, troot, gain});
                const double y = gain - comp, t = acc + y;
                comp = (t - acc) - y;
                acc = t;
            }
        } else {  // growth begins
            a_t = troot;
        }
        lastD = droot;
    }
    if (!sigma.empty() && sigma.back() > 0) {
        const double gain = D.back() - lastD;
        if (gain > 0) {
            det.intervals.push_back({a_t, t0 + (n - 1) * h, gain});
            acc += gain;
        }
    }
    det.total = acc;
    return det;
}

// Per-grid-point data from which any antipodal pure pair evaluates in O(1).
struct PairGrid {
    double t0{0}, h{0};
    std::size_t n{0};
    Engine engine{Engine::FullClosed};
    // full engine
    std::vector<cplx> v1, v2, W;     // W = g e^{2iωt} conj(decay)², decay = e^{−Γ*/2}
    std::vector<double> E2, gr;      // E2 = e^{−Γr}
    std::vector<cplx> decay;
    // RWA/SA
    std::vector<double> Eh2, rate;   // Eh2 = e^{−Γ_z}, rate = f₋/2 or g_r
};

struct PairEval {
    double N{0};
    std::vector<GrowthInterval> intervals;
};

PairEval eval_pair(const PairGrid& g, double theta_pol, double phi, bool want_intervals) {
    const double st = std::sin(theta_pol), ct = std::cos(theta_pol);
    std::vector<double> D(g.n), S(g.n);
    if (g.engine == Engine::FullBloch || g.engine == Engine::FullClosed) {
        const cplx em{std::cos(phi), -std::sin(phi)};
        const cplx ep = std::conj(em);
        for (std::size_t k = 0; k < g.n; ++k) {
            const cplx comb = g.v1[k] * em + g.v2[k] * ep;
            const double c2 = std::norm(comb);
            const double perp2 = 4 * st * st * g.E2[k] * c2;
            const double dz = 2 * ct * g.E2[k];
            const double n2 = perp2 + dz * dz;
            const double nrm = std::sqrt(n2);
            const cplx cc = std::conj(comb);
            const double oscil = 4 * st * st * (g.W[k] * cc * cc).real();
            D[k] = 0.5 * nrm;
            S[k] = nrm > 0 ? (-g.gr[k] * (n2 + dz * dz) + oscil) / (2 * nrm) : 0.0;
        }
    } else {
        for (std::size_t k = 0; k < g.n; ++k) {
            const double e2 = g.Eh2[k];
            const double perp2 = 4 * st * st * e2;
            const double dz = 2 * ct * e2;
            const double n2 = perp2 + dz * dz;
            const double nrm = std::sqrt(n2);
            D[k] = 0.5 * nrm;
            S[k] = nrm > 0 ? -g.rate[k] * (n2 + dz * dz) / (2 * nrm) : 0.0;
        }
    }
    Detection det = detect_growth(g.t0, g.h, D, S);
    PairEval out;
    out.N = det.total;
    if (want_intervals) out.intervals = std::move(det.intervals);
    return out;
}

PairGrid build_pair_grid(Engine engine, const CoefficientSet& coeffs, double T, double h,
                         const MeasureConfig& cfg) {
    PairGrid g;
    g.engine = engine;
    g.h = h;
    g.n = static_cast<std::size_t>(std::floor(T / h)) + 1;
    const double wa = coeffs.model().omega_a;
    if (engine == Engine::FullBloch || engine == Engine::FullClosed) {
        dynamics::EvolutionConfig ecfg;
        ecfg.engine = Engine::FullClosed;
        ecfg.t_max = (g.n - 1) * h;
        ecfg.rel_tol = cfg.ode_rel_tol;
        ecfg.abs_tol = cfg.ode_abs_tol;
        ecfg.output_times.resize(g.n);
        for (std::size_t k = 0; k < g.n; ++k) ecfg.output_times[k] = k * h;
        const auto map = dynamics::evolve_map(coeffs, ecfg);
        g.v1.resize(g.n);
        g.v2.resize(g.n);
        g.W.resize(g.n);
        g.E2.resize(g.n);
        g.gr.resize(g.n);
        g.decay.resize(g.n);
        for (std::size_t k = 0; k < g.n; ++k) {
            const auto& ms = map[k];
            g.v1[k] = ms.v1;
            g.v2[k] = ms.v2;
            const cplx dec = std::exp(-0.5 * std::conj(ms.Gamma));
            g.decay[k] = dec;
            g.E2[k] = std::exp(-ms.Gamma.real());
            const double ph = 2 * wa * ms.t;
            const cplx osc = coeffs.g(ms.t) * cplx{std::cos(ph), std::sin(ph)};
            const cplx cd = std::conj(dec);
            g.W[k] = osc * cd * cd;
            g.gr[k] = coeffs.g_r(ms.t);
        }
    } else {
        g.Eh2.resize(g.n);
        g.rate.resize(g.n);
        for (std::size_t k = 0; k < g.n; ++k) {
            const double t = k * h;
            if (engine == Engine::RWA) {
                g.Eh2[k] = std::exp(-coeffs.gamma_rwa(t));
                g.rate[k] = 0.5 * coeffs.f_minus(t);
            } else {
                g.Eh2[k] = std::exp(-coeffs.big_gamma(t).real());
                g.rate[k] = coeffs.g_r(t);
            }
        }
    }
    return g;
}

double golden_max(const std::function<double(double)>& f, double lo, double hi, double tol) {
    const double gr = (std::sqrt(5.0) - 1) / 2;
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

double trace_distance(const QubitState& a, const QubitState& b) {
    const double dx = a.lx - b.lx, dy = a.ly - b.ly, dz = a.lz - b.lz;
    return 0.5 * std::sqrt(dx * dx + dy * dy + dz * dz);
}

double trace_distance_eigen(const QubitState& a, const QubitState& b) {
    // δρ is Hermitian with entries [[p, q],[q*, -p]]·… general 2×2 route
    const double p = a.rho11() - b.rho11();
    const double m = a.rho00() - b.rho00();
    const cplx q = a.rho10() - b.rho10();
    const double tr = p + m;
    const double det = p * m - std::norm(q);
    const double disc = std::sqrt(std::max(0.0, tr * tr - 4 * det));
    const double e1 = 0.5 * (tr + disc), e2 = 0.5 * (tr - disc);
    return 0.5 * (std::abs(e1) + std::abs(e2));
}

SigmaTrace sigma_series(const std::vector<dynamics::TimedState>& a,
                        const std::vector<dynamics::TimedState>& b,
                        const CoefficientSet* coeffs, Engine engine) {
    if (a.size() != b.size() || a.size() < 5)
        throw ValidationError("sigma_series: need equal grids with at least 5 points");
    const std::size_t n = a.size();
    const double h = a[1].t - a[0].t;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::abs(a[i].t - b[i].t) > 1e-10 * (1 + std::abs(a[i].t)))
            throw ValidationError("sigma_series: trajectory grids differ");
        if (i > 0 && std::abs((a[i].t - a[i - 1].t) - h) > 1e-9 * h)
            throw ValidationError("sigma_series: grid must be uniform");
    }
    if (coeffs && h > kPi / (10.0 * coeffs->model().omega_a))
        throw ValidationError("sigma_series: grid step too coarse (> pi/(10 omega_a))");

    SigmaTrace st;
    st.t.resize(n);
    st.D.resize(n);
    st.sigma.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        st.t[i] = a[i].t;
        st.D[i] = trace_distance(a[i].state, b[i].state);
    }
    if (coeffs) {
        const double wa = coeffs->model().omega_a;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = a[i].t;
            const double dx = a[i].state.lx - b[i].state.lx;
            const double dy = a[i].state.ly - b[i].state.ly;
            const double dz = a[i].state.lz - b[i].state.lz;
            const double n2 = dx * dx + dy * dy + dz * dz;
            const double nrm = std::sqrt(n2);
            if (nrm == 0) {
                st.sigma[i] = 0;
                continue;
            }
            double num;
            if (engine == Engine::RWA) {
                num = -0.5 * coeffs->f_minus(t) * (n2 + dz * dz);
            } else if (engine == Engine::SA) {
                num = -coeffs->g_r(t) * (n2 + dz * dz);
            } else {
                const double ph = 2 * wa * t;
                const cplx osc = coeffs->g(t) * cplx{std::cos(ph), std::sin(ph)};
                const cplx dperp{dx, dy};
                num = -coeffs->g_r(t) * (n2 + dz * dz) + (osc * dperp * dperp).real();
            }
            st.sigma[i] = num / (2 * nrm);
        }
    } else {
        // 4th-order central differences, one-sided at the edges
        auto d = [&](std::size_t i) { return st.D[i]; };
        for (std::size_t i = 0; i < n; ++i) {
            if (i >= 2 && i + 2 < n)
                st.sigma[i] = (d(i - 2) - 8 * d(i - 1) + 8 * d(i + 1) - d(i + 2)) / (12 * h);
            else if (i == 0)
                st.sigma[i] = (-25 * d(0) + 48 * d(1) - 36 * d(2) + 16 * d(3) - 3 * d(4)) / (12 * h);
            else if (i == 1)
                st.sigma[i] = (-3 * d(0) - 10 * d(1) + 18 * d(2) - 6 * d(3) + d(4)) / (12 * h);
            else if (i + 2 == n)
                st.sigma[i] = (3 * d(n - 1) + 10 * d(n - 2) - 18 * d(n - 3) + 6 * d(n - 4) - d(n - 5)) /
                              (-12 * h);
            else
                st.sigma[i] = (25 * d(n - 1) - 48 * d(n - 2) + 36 * d(n - 3) - 16 * d(n - 4) +
                               3 * d(n - 5)) / (12 * h);
        }
    }
    Detection det = detect_growth(st.t[0], h, st.D, st.sigma);
    st.growth = std::move(det.intervals);
    st.total_gain = det.total;
    return st;
}

AnalyticMeasure analytic_measure(const CoefficientSet& coeffs) {
    const auto& a = coeffs.asym();
    AnalyticMeasure am;
    am.nu = a.nu;
    am.mu = a.mu;
    am.theta_inf = a.theta_inf;
    am.gr_inf = a.g_inf.real();
    am.gi_inf = a.g_inf.imag();
    am.omega_a = coeffs.model().omega_a;
    am.tau_r = am.gr_inf > 0 ? 1.0 / am.gr_inf : std::numeric_limits<double>::infinity();
    am.eps = 1.0 / (2.0 * am.tau_r * (am.omega_a - am.gi_inf));
    return am;
}

double sigma_perp_ana(const AnalyticMeasure& am, double xi0, double t) {
    const double xi_t = xi0 - 2 * am.gi_inf * t;
    return std::exp(-t / am.tau_r) / am.tau_r *
           (am.mu * std::cos(2 * am.omega_a * t + xi_t + am.theta_inf) - 1.0);
}

double n_ana(const AnalyticMeasure& am) {
    if (!(am.gr_inf > 0)) throw ValidationError("n_ana: g_r(inf) must be positive");
    return (am.nu - std::atan(am.nu)) / kPi;
}

double n_ana_corrected(const AnalyticMeasure& am, double xi0) {
    return n_ana(am) * (1.0 + (kPi + am.theta_inf + xi0) * am.eps);
}

double n_ana_finite_T(const AnalyticMeasure& am, double T) {
    if (!(T > 0)) throw ValidationError("n_ana_finite_T: T must be positive");
    return (1.0 - std::exp(-T / am.tau_r)) * n_ana(am);
}

std::vector<std::pair<double, double>> positivity_windows(const AnalyticMeasure& am, double xi0,
                                                          int n_max) {
    std::vector<std::pair<double, double>> out;
    if (am.mu <= 1.0) return out;
    const double acs = std::acos(1.0 / am.mu);
    const double den = 2.0 * (am.omega_a - am.gi_inf);
    for (int n = 0; static_cast<int>(out.size()) < n_max; ++n) {
        const double tm = (2 * n * kPi - am.theta_inf - xi0 - acs) / den;
        const double tp = (2 * n * kPi - am.theta_inf - xi0 + acs) / den;
        if (tp <= 0) continue;
        out.emplace_back(std::max(0.0, tm), tp);
        if (n > n_max + 8) break;  // safety for absurd inputs
    }
    return out;
}

namespace {

// ∫ over the rate<0 regions of weight(t)·(−rate(t)) dt, on [0, t_switch]
double negative_rate_integral(const CoefficientSet& coeffs,
                              const std::function<double(double)>& rate,
                              const std::function<double(double)>& weight, double scale) {
    const double tend = coeffs.t_switch();
    const double dt = coeffs.grid_step();
    const std::size_t n = static_cast<std::size_t>(tend / dt);
    auto refine = [&](double lo, double hi) {
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            if ((rate(lo) < 0) == (rate(mid) < 0))
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    };
    double total = 0.0;
    double seg_start = -1.0;
    bool neg = rate(0.0) < 0;
    if (neg) seg_start = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        const double t = k * dt;
        const bool now = rate(t) < 0;
        if (now == neg) continue;
        const double root = refine(t - dt, t);
        if (neg) {
            // closing a negative segment
            quad::Options o;
            o.rel_tol = 1e-10;
            o.abs_tol = 1e-16 * std::max(scale, 1e-300);
            total += quad::integrate([&](double s) { return -rate(s) * weight(s); }, seg_start,
                                     root, o).value;
        } else {
            seg_start = root;
        }
        neg = now;
    }
    if (neg) {
        quad::Options o;
        o.rel_tol = 1e-10;
        total += quad::integrate([&](double s) { return -rate(s) * weight(s); }, seg_start, tend, o)
                     .value;
    }
    return total;
}

} // namespace

double n_rwa_closed(const CoefficientSet& coeffs) {
    // ½∫[|f₋|−f₋]e^{−Γ^RWA} dt; the integrand vanishes wherever f₋ ≥ 0 and the
    // frozen tail has f₋ = f₋(∞) ≥ 0, so [0, t_switch] carries everything.
    return negative_rate_integral(
        coeffs, [&](double t) { return coeffs.f_minus(t); },
        [&](double t) { return std::exp(-coeffs.gamma_rwa(t)); }, coeffs.asym().f_minus_inf);
}

double n_sa_closed(const CoefficientSet& coeffs) {
    // ∫[|g_r|−g_r]e^{−Γr} dt = 2∫_{g_r<0}(−g_r)e^{−Γr} dt
    return 2.0 * negative_rate_integral(
                     coeffs, [&](double t) { return coeffs.g_r(t); },
                     [&](double t) { return std::exp(-coeffs.big_gamma(t).real()); },
                     coeffs.asym().g_inf.real());
}

MeasureResult nonmarkovianity(Engine engine, const CoefficientSet& coeffs,
                              const MeasureConfig& cfg) {
    const auto& model = coeffs.model();
    const auto ts = spectral::timescales(model, coeffs);
    const double T = cfg.horizon_override > 0 ? cfg.horizon_override
                                              : cfg.horizon_tau_r * ts.tau_r;
    if (!(T > 0) || !std::isfinite(T))
        throw ValidationError("nonmarkovianity: horizon is not finite (g_r(inf) <= 0?)");
    if (T < 10.0 * ts.tau_c)
        throw ValidationError("nonmarkovianity: horizon shorter than 10 tau_c");
    if (T > coeffs.horizon() * (1 + 1e-9))
        throw ValidationError("nonmarkovianity: horizon exceeds the coefficient validity range");
    const double h = cfg.grid_step > 0 ? cfg.grid_step : kPi / (40.0 * model.omega_a);
    if (h > kPi / (10.0 * model.omega_a))
        throw ValidationError("nonmarkovianity: grid step too coarse");

    const PairGrid grid = build_pair_grid(engine, coeffs, T, h, cfg);

    MeasureResult res;
    res.engine = engine;
    res.T = (grid.n - 1) * h;
    const AnalyticMeasure am = analytic_measure(coeffs);
    res.nu = am.nu;
    res.mu = am.mu;
    res.N_ana = am.gr_inf > 0 ? n_ana(am) : 0.0;

    double best_th = kPi / 2, best_phi = 0;
    if (std::isfinite(cfg.fixed_xi0)) {
        best_phi = 0.5 * cfg.fixed_xi0;
        res.N = eval_pair(grid, best_th, best_phi, false).N;
    } else {
        struct Cand {
            double th, phi;
        };
        std::vector<Cand> cands;
        for (int i = 0; i < cfg.polar_points; ++i)
            for (int j = 0; j < cfg.azimuth_points; ++j)
                cands.push_back({0.5 * kPi * i / (cfg.polar_points - 1), kPi * j / cfg.azimuth_points});
        if (cfg.random_restarts > 0) {
            std::mt19937_64 rng(cfg.seed);
            std::uniform_real_distribution<double> uz(0.0, 1.0), uphi(0.0, kPi);
            for (int k = 0; k < cfg.random_restarts; ++k)
                cands.push_back({std::acos(uz(rng)), uphi(rng)});
        }
        std::vector<double> Ns(cands.size());
        parallel_for(cands.size(), cfg.workers,
                     [&](std::size_t i) { Ns[i] = eval_pair(grid, cands[i].th, cands[i].phi, false).N; });
        // deterministic argmax; ties resolved toward the equator,
        // then smallest ξ(0)
        std::size_t best = 0;
        double bestN = -1;
        for (std::size_t i = 0; i < cands.size(); ++i) bestN = std::max(bestN, Ns[i]);
        double best_dev = 1e300, best_xi = 1e300;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            if (Ns[i] < bestN - 1e-9) continue;
            const double dev = std::abs(cands[i].th - kPi / 2);
            const double xi = 2 * cands[i].phi;
            if (dev < best_dev - 1e-15 || (std::abs(dev - best_dev) <= 1e-15 && xi < best_xi)) {
                best = i;
                best_dev = dev;
                best_xi = xi;
            }
        }
        best_th = cands[best].th;
        best_phi = cands[best].phi;

        // golden-section refinement, azimuth (great circle) first, then polar
        const double dphi = kPi / cfg.azimuth_points;
        best_phi = golden_max([&](double p) { return eval_pair(grid, best_th, p, false).N; },
                              best_phi - dphi, best_phi + dphi, 0.5 * cfg.xi_tol);
        if (cfg.polar_points > 1) {
            const double dth = 0.5 * kPi / (cfg.polar_points - 1);
            best_th = golden_max([&](double th) { return eval_pair(grid, th, best_phi, false).N; },
                                 std::max(0.0, best_th - dth), std::min(kPi / 2, best_th + dth),
                                 0.5 * cfg.xi_tol);
        }
        res.N = eval_pair(grid, best_th, best_phi, false).N;
    }

    PairEval fin = eval_pair(grid, best_th, best_phi, true);
    res.N = fin.N;
    res.intervals = std::move(fin.intervals);
    // canonical azimuth in [0, π)
    best_phi = std::fmod(best_phi, kPi);
    if (best_phi < 0) best_phi += kPi;
    res.xi0 = 2 * best_phi;
    res.lambda0 = {std::sin(best_th) * std::cos(best_phi), std::sin(best_th) * std::sin(best_phi),
                   std::cos(best_th)};
    if ((engine == Engine::FullBloch || engine == Engine::FullClosed) && am.gr_inf > 0)
        res.residual_estimate = std::exp(-res.T / am.tau_r) * res.N_ana;
    return res;
}

} // namespace sbnm::measure
