#include "sbnm/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "sbnm/chimap.hpp"
#include "sbnm/dynamics.hpp"
#include "sbnm/errors.hpp"
#include "sbnm/parallel.hpp"

namespace sbnm::sweep {

using dynamics::Engine;
using spectral::Family;
using spectral::SpectralModel;

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string family_name(Family f) {
    switch (f) {
        case Family::Lorentzian: return "lorentzian";
        case Family::Ohmic: return "ohmic";
        case Family::Tabulated: return "tabulated";
    }
    return "?";
}

SpectralModel point_model(const SweepSpec& spec, double value) {
    if (spec.family == Family::Lorentzian)
        return SpectralModel::lorentzian(spec.alpha, spec.lambda, value);
    return SpectralModel::ohmic(spec.alpha, value);
}

void provenance_header(std::ostream& os, const SweepSpec& spec) {
    os << "# sbnm " << kToolkitVersion << " sweep\n";
    os << "# family=" << family_name(spec.family) << " swept=" << spec.swept << " min="
       << fmt(spec.min) << " max=" << fmt(spec.max) << " points=" << spec.points
       << " scale=" << (spec.log_scale ? "log" : "lin") << "\n";
    os << "# alpha=" << fmt(spec.alpha);
    if (spec.family == Family::Lorentzian) os << " lambda=" << fmt(spec.lambda);
    os << " omega_a=1\n";
    os << "# engines=" << (spec.do_full ? "full," : "") << (spec.do_rwa ? "rwa," : "")
       << (spec.do_sa ? "sa" : "") << " horizon_tau_r=" << fmt(spec.horizon_tau_r)
       << " polar=" << spec.polar_points << " azimuth=" << spec.azimuth_points
       << " cpt_times=" << spec.cpt_times << " seed=" << spec.seed << "\n";
}

} // namespace

void SweepSpec::validate() const {
    if (family == Family::Tabulated)
        throw ValidationError("sweeps are defined for the lorentzian and ohmic families");
    if (!(std::isfinite(min) && std::isfinite(max) && min < max))
        throw ValidationError("sweep range must be finite with min < max");
    if (points < 2) throw ValidationError("sweep needs at least 2 points");
    if (family == Family::Lorentzian && swept != "delta")
        throw ValidationError("lorentzian sweeps vary `delta`");
    if (family == Family::Ohmic && swept != "omega_c")
        throw ValidationError("ohmic sweeps vary `omega_c`");
    if (!(alpha > 0)) throw ValidationError("alpha must be positive");
    if (family == Family::Lorentzian && !(lambda > 0))
        throw ValidationError("lambda must be positive");
    if (log_scale && !(min > 0)) throw ValidationError("log-scale sweep needs min > 0");
    if (workers < 1) throw ValidationError("workers must be >= 1");
    if (horizon_tau_r < 1) throw ValidationError("horizon_tau_r must be >= 1");
}

std::vector<double> SweepSpec::values() const {
    std::vector<double> v(points);
    for (int i = 0; i < points; ++i) {
        const double f = static_cast<double>(i) / (points - 1);
        v[i] = log_scale ? min * std::pow(max / min, f) : min + (max - min) * f;
    }
    return v;
}

SweepSpec load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    SweepSpec spec;
    bool lambda_seen = false, omega_c_seen = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto notspace = line.find_first_not_of(" \t\r");
        if (notspace == std::string::npos) continue;
        const auto eq = line.find('=');
        const auto where = path + ":" + std::to_string(lineno);
        if (eq == std::string::npos) throw ValidationError(where + ": expected `key = value`");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) throw ValidationError(where + ": empty key or value");
        auto num = [&](const char* name) {
            try {
                std::size_t pos = 0;
                const double x = std::stod(val, &pos);
                if (pos != val.size()) throw std::invalid_argument("");
                return x;
            } catch (...) {
                throw ValidationError(where + ": field `" + name + "` is not a number: " + val);
            }
        };
        if (key == "family") {
            if (val == "lorentzian")
                spec.family = Family::Lorentzian;
            else if (val == "ohmic")
                spec.family = Family::Ohmic;
            else
                throw ValidationError(where + ": unknown family: " + val);
        } else if (key == "swept") {
            spec.swept = val;
        } else if (key == "min") {
            spec.min = num("min");
        } else if (key == "max") {
            spec.max = num("max");
        } else if (key == "points") {
            spec.points = static_cast<int>(num("points"));
        } else if (key == "scale") {
            if (val == "log")
                spec.log_scale = true;
            else if (val == "lin")
                spec.log_scale = false;
            else
                throw ValidationError(where + ": scale must be lin or log");
        } else if (key == "alpha") {
            spec.alpha = num("alpha");
        } else if (key == "lambda") {
            spec.lambda = num("lambda");
            if (!(spec.lambda > 0))
                throw ValidationError(where + ": field `lambda` must be positive");
            lambda_seen = true;
        } else if (key == "omega_c") {
            spec.omega_c = num("omega_c");
            omega_c_seen = true;
        } else if (key == "engines") {
            spec.do_full = val.find("full") != std::string::npos;
            spec.do_rwa = val.find("rwa") != std::string::npos;
            spec.do_sa = val.find("sa") != std::string::npos;
        } else if (key == "out") {
            spec.out = val;
        } else if (key == "workers") {
            spec.workers = static_cast<int>(num("workers"));
        } else if (key == "seed") {
            spec.seed = static_cast<unsigned long long>(num("seed"));
        } else if (key == "horizon_tau_r") {
            spec.horizon_tau_r = num("horizon_tau_r");
        } else if (key == "polar_points") {
            spec.polar_points = static_cast<int>(num("polar_points"));
        } else if (key == "azimuth_points") {
            spec.azimuth_points = static_cast<int>(num("azimuth_points"));
        } else if (key == "cpt_times") {
            spec.cpt_times = static_cast<int>(num("cpt_times"));
        } else {
            throw ValidationError(where + ": unknown key: " + key);
        }
    }
    if (spec.family == Family::Lorentzian && omega_c_seen)
        throw ValidationError(path + ": field `omega_c` is not valid for a lorentzian sweep");
    if (spec.family == Family::Ohmic && lambda_seen)
        throw ValidationError(path + ": field `lambda` is not valid for an ohmic sweep");
    spec.validate();
    return spec;
}

SweepTable run_sweep(const SweepSpec& spec) {
    spec.validate();
    SweepTable table;
    table.spec = spec;
    const auto values = spec.values();
    table.rows.resize(values.size());

    parallel_for(values.size(), spec.workers, [&](std::size_t i) {
        SweepRow row;
        row.param = values[i];
        try {
            const SpectralModel model = point_model(spec, values[i]);
            spectral::GridOptions gopt;
            gopt.horizon_tau_r = spec.horizon_tau_r + 0.5;
            const auto coeffs = spectral::build_coefficients(model, gopt);
            const auto ts = spectral::timescales(model, coeffs);
            row.nu = coeffs.asym().nu;
            row.mu = coeffs.asym().mu;
            row.tau_r_over_tau_c = ts.tau_r / ts.tau_c;
            row.extension_valid = model.lorentzian_extension_valid();
            const auto am = measure::analytic_measure(coeffs);
            row.n_ana = coeffs.asym().g_inf.real() > 0 ? measure::n_ana(am) : 0.0;

            if (spec.do_rwa) row.n_rwa = measure::n_rwa_closed(coeffs);
            if (spec.do_sa) row.n_sa = measure::n_sa_closed(coeffs);
            if (spec.do_full) {
                measure::MeasureConfig mc;
                mc.horizon_tau_r = spec.horizon_tau_r;
                mc.polar_points = spec.polar_points;
                mc.azimuth_points = spec.azimuth_points;
                mc.workers = 1;  // sweep points are the parallel unit
                mc.seed = spec.seed;
                const auto res = measure::nonmarkovianity(Engine::FullClosed, coeffs, mc);
                row.n_full = res.N;
                row.xi0 = res.xi0;
            }

            // CPT certification at log-spaced times
            if (spec.cpt_times > 0) {
                const double t_lo = 0.1 / model.omega_a;
                const double t_hi = spec.horizon_tau_r * ts.tau_r;
                dynamics::EvolutionConfig ecfg;
                ecfg.engine = Engine::FullClosed;
                ecfg.t_max = t_hi;
                for (int k = 0; k < spec.cpt_times; ++k)
                    ecfg.output_times.push_back(
                        t_lo * std::pow(t_hi / t_lo, static_cast<double>(k) / (spec.cpt_times - 1)));
                const auto map = dynamics::evolve_map(coeffs, ecfg);
                row.cpt_min_lambda = 1e300;
                row.cpt_residual = 0;
                for (const auto& ms : map) {
                    const auto kd = chimap::kraus_from_mapstate(ms);
                    const auto rep = chimap::check_cpt(kd);
                    row.cpt_min_lambda = std::min(row.cpt_min_lambda, rep.min_lambda);
                    row.cpt_residual = std::max(row.cpt_residual, rep.completeness_residual);
                }
                row.cpt_pass = row.cpt_min_lambda >= -1e-9 && row.cpt_residual <= 1e-9;
            }
        } catch (const std::exception& e) {
            row.status = std::string("failed: ") + e.what();
        }
        table.rows[i] = std::move(row);
    });
    return table;
}

void write_sweep_csv(const SweepTable& table, std::ostream& os) {
    provenance_header(os, table.spec);
    os << table.spec.swept
       << ",nu,mu,N_ana,N_full,N_rwa,N_sa,xi0,cpt_min_lambda,cpt_residual,cpt_pass,"
          "tau_r_over_tau_c,extension_valid,status\n";
    for (const auto& r : table.rows) {
        os << fmt(r.param) << ',' << fmt(r.nu) << ',' << fmt(r.mu) << ',' << fmt(r.n_ana) << ','
           << fmt(r.n_full) << ',' << fmt(r.n_rwa) << ',' << fmt(r.n_sa) << ',' << fmt(r.xi0) << ','
           << fmt(r.cpt_min_lambda) << ',' << fmt(r.cpt_residual) << ',' << (r.cpt_pass ? 1 : 0)
           << ',' << fmt(r.tau_r_over_tau_c) << ',' << (r.extension_valid ? 1 : 0) << ','
           << r.status << "\n";
    }
}

FigureTag parse_figure_tag(const std::string& name) {
    if (name == "fig1a") return FigureTag::Fig1a;
    if (name == "fig1b") return FigureTag::Fig1b;
    if (name == "fig2a") return FigureTag::Fig2a;
    if (name == "fig2b") return FigureTag::Fig2b;
    if (name == "fig3a") return FigureTag::Fig3a;
    if (name == "fig3b") return FigureTag::Fig3b;
    if (name == "fig4") return FigureTag::Fig4;
    throw ValidationError("unknown figure tag: " + name +
                          " (expected fig1a|fig1b|fig2a|fig2b|fig3a|fig3b|fig4)");
}

namespace {

// Fig. 2 parameter set: alpha = 0.01, lambda = 0.1, delta = -0.9 (units of omega_a)
SpectralModel fig2_model() { return SpectralModel::lorentzian(0.01, 0.1, -0.9); }

void emit_fig1(std::ostream& os, bool lorentz_panel, const FigureOptions& opts, bool with_full,
               const char* tag) {
    os << "# figure=" << tag << "\n";
    SweepSpec spec;
    spec.family = lorentz_panel ? Family::Lorentzian : Family::Ohmic;
    spec.swept = lorentz_panel ? "delta" : "omega_c";
    spec.min = lorentz_panel ? -1.0 : 0.2;
    spec.max = lorentz_panel ? 0.5 : 20.0;
    spec.log_scale = !lorentz_panel;
    spec.points = opts.sweep_points > 0 ? opts.sweep_points : 61;
    spec.alpha = 0.01;
    spec.lambda = 0.1;
    spec.workers = opts.workers;
    spec.horizon_tau_r = opts.horizon_tau_r;
    spec.do_full = with_full;
    spec.cpt_times = 0;
    const auto table = run_sweep(spec);
    provenance_header(os, spec);
    if (with_full) {
        os << spec.swept << ",N_full,N_rwa,N_sa,N_ana,nu,mu,status\n";
        for (const auto& r : table.rows)
            os << fmt(r.param) << ',' << fmt(r.n_full) << ',' << fmt(r.n_rwa) << ',' << fmt(r.n_sa)
               << ',' << fmt(r.n_ana) << ',' << fmt(r.nu) << ',' << fmt(r.mu) << ',' << r.status
               << "\n";
    } else {
        os << spec.swept << ",N_ana,N_rwa,N_sa,nu,mu,status\n";
        for (const auto& r : table.rows)
            os << fmt(r.param) << ',' << fmt(r.n_ana) << ',' << fmt(r.n_rwa) << ',' << fmt(r.n_sa)
               << ',' << fmt(r.nu) << ',' << fmt(r.mu) << ',' << r.status << "\n";
    }
}

void emit_fig2a(std::ostream& os) {
    const auto model = fig2_model();
    const auto coeffs = spectral::build_coefficients(model);
    os << "# sbnm " << kToolkitVersion
       << " fig2a: sigma under the SA master equation, maximizing pair (poles)\n";
    os << "# alpha=0.01 lambda=0.1 delta=-0.9 omega_a=1\n";
    os << "t,sigma_sa,sigma_sa_pos\n";
    const double tc = model.tau_c();
    const double h = kPi / (40 * model.omega_a);
    for (double t = 0; t <= 10 * tc; t += h) {
        const double s = -2.0 * coeffs.g_r(t) * std::exp(-coeffs.big_gamma(t).real());
        os << fmt(t) << ',' << fmt(s) << ',' << fmt(std::max(0.0, s)) << "\n";
    }
}

void emit_fig2b(std::ostream& os, const FigureOptions& opts) {
    const auto model = fig2_model();
    spectral::GridOptions gopt;
    gopt.horizon_tau_r = std::max(2.0, opts.horizon_tau_r);
    const auto coeffs = spectral::build_coefficients(model, gopt);
    const auto am = measure::analytic_measure(coeffs);
    const double xi0 = kPi;
    const double T = 1.5 * am.tau_r;
    const double h = kPi / (40 * model.omega_a);
    const std::size_t n = static_cast<std::size_t>(T / h) + 1;

    dynamics::EvolutionConfig ecfg;
    ecfg.engine = Engine::FullClosed;
    ecfg.t_max = (n - 1) * h;
    ecfg.output_times.resize(n);
    for (std::size_t k = 0; k < n; ++k) ecfg.output_times[k] = k * h;
    const auto e1 = dynamics::evolve_full_closed(coeffs, dynamics::QubitState::equatorial(xi0), ecfg);
    const auto e2 = dynamics::evolve_full_closed(coeffs, dynamics::QubitState{-e1.states[0].state.lx,
                                                                              -e1.states[0].state.ly,
                                                                              0.0}, ecfg);
    const auto st = measure::sigma_series(e1.states, e2.states, &coeffs, Engine::FullClosed);
    os << "# sbnm " << kToolkitVersion << " fig2b: sigma_perp, full master equation, xi0=pi\n";
    os << "# alpha=0.01 lambda=0.1 delta=-0.9 omega_a=1\n";
    os << "t,sigma_numeric,sigma_ana\n";
    for (std::size_t k = 0; k < st.t.size(); ++k)
        os << fmt(st.t[k]) << ',' << fmt(st.sigma[k]) << ','
           << fmt(measure::sigma_perp_ana(am, xi0, st.t[k])) << "\n";
}

void emit_fig4(std::ostream& os) {
    os << "# sbnm " << kToolkitVersion
       << " fig4: gi kernel vs omega at t*omega_a = {5, 50}; spectral densities scaled to peak 1\n";
    os << "# J_ohmic: omega_c=omega_a; J_lorentz: delta=0, lambda=0.1 (tau_s/tau_c = 0.1)\n";
    os << "omega,gi_t5,gi_t50,J_ohmic_scaled,J_lorentz_scaled\n";
    const auto jo = SpectralModel::ohmic(0.01, 1.0);
    const auto jl = SpectralModel::lorentzian(0.01, 0.1, 0.0);
    const double jo_peak = spectral::eval_spectral_density(jo, 1.0);
    const double jl_peak = spectral::eval_spectral_density(jl, 1.0);
    for (int i = 0; i <= 1200; ++i) {
        const double w = 3.0 * i / 1200;
        os << fmt(w) << ',' << fmt(spectral::gi_kernel(w, 5.0, 1.0)) << ','
           << fmt(spectral::gi_kernel(w, 50.0, 1.0)) << ','
           << fmt(spectral::eval_spectral_density(jo, w) / jo_peak) << ','
           << fmt(spectral::eval_spectral_density(jl, w) / jl_peak) << "\n";
    }
}

} // namespace

void emit_figure_data(FigureTag which, std::ostream& os, const FigureOptions& opts) {
    switch (which) {
        case FigureTag::Fig1a: emit_fig1(os, true, opts, true, "fig1a"); return;
        case FigureTag::Fig1b: emit_fig1(os, false, opts, true, "fig1b"); return;
        case FigureTag::Fig2a: emit_fig2a(os); return;
        case FigureTag::Fig2b: emit_fig2b(os, opts); return;
        case FigureTag::Fig3a: emit_fig1(os, true, opts, true, "fig3a"); return;
        case FigureTag::Fig3b: emit_fig1(os, false, opts, true, "fig3b"); return;
        case FigureTag::Fig4: emit_fig4(os); return;
    }
    throw ValidationError("unknown figure tag");
}

} // namespace sbnm::sweep
