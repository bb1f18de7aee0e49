// sbnm — command-line driver: coefficients, evolution, Kraus maps, the
// non-Markovianity measure, and the figure/sweep data generators.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sbnm/chimap.hpp"
#include "sbnm/dynamics.hpp"
#include "sbnm/errors.hpp"
#include "sbnm/measure.hpp"
#include "sbnm/spectral.hpp"
#include "sbnm/sweep.hpp"

using json = nlohmann::json;
using namespace sbnm;

namespace {

struct GlobalOpts {
    std::string spectral{"lorentzian"};
    double alpha{0.01};
    double lambda{0.1};
    double delta{-0.9};
    double omega_c{1.0};
    double tau_c_table{1.0};
    std::string engine{"closed"};
    double tmax{0};
    std::string out;
    std::string format{"csv"};
    int workers{1};
    unsigned long long seed{0};
};

spectral::SpectralModel make_model(const GlobalOpts& g) {
    if (g.spectral == "lorentzian")
        return spectral::SpectralModel::lorentzian(g.alpha, g.lambda, g.delta);
    if (g.spectral == "ohmic") return spectral::SpectralModel::ohmic(g.alpha, g.omega_c);
    if (g.spectral.rfind("table:", 0) == 0)
        return spectral::SpectralModel::tabulated_from_file(g.spectral.substr(6), g.tau_c_table);
    throw ValidationError("--spectral must be lorentzian, ohmic, or table:<path>");
}

dynamics::Engine parse_engine(const std::string& s) {
    if (s == "bloch") return dynamics::Engine::FullBloch;
    if (s == "closed" || s == "full") return dynamics::Engine::FullClosed;
    if (s == "rwa") return dynamics::Engine::RWA;
    if (s == "sa") return dynamics::Engine::SA;
    throw ValidationError("--engine must be bloch, closed, rwa, or sa");
}

dynamics::QubitState parse_state(const std::string& s) {
    if (s == "excited") return dynamics::QubitState::excited();
    if (s == "ground") return dynamics::QubitState::ground();
    if (s.rfind("equatorial:", 0) == 0)
        return dynamics::QubitState::equatorial(std::stod(s.substr(11)));
    double lx, ly, lz;
    if (std::sscanf(s.c_str(), "%lf,%lf,%lf", &lx, &ly, &lz) == 3)
        return dynamics::QubitState::from_bloch(lx, ly, lz);
    throw ValidationError("--state must be excited, ground, equatorial:<xi>, or lx,ly,lz");
}

std::ostream& open_out(const GlobalOpts& g, std::ofstream& file) {
    if (g.out.empty() || g.out == "-") return std::cout;
    file.open(g.out);
    if (!file) throw ValidationError("cannot open output file: " + g.out);
    return file;
}

std::string engine_name(dynamics::Engine e) {
    switch (e) {
        case dynamics::Engine::FullBloch: return "bloch";
        case dynamics::Engine::FullClosed: return "closed";
        case dynamics::Engine::RWA: return "rwa";
        case dynamics::Engine::SA: return "sa";
    }
    return "?";
}

int run(int argc, char** argv) {
    CLI::App app{"spin-boson qubit: TCL2 dynamics and trace-distance non-Markovianity"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOpts g;
    app.add_option("--spectral", g.spectral, "lorentzian | ohmic | table:<path>");
    app.add_option("--alpha", g.alpha, "coupling strength (units of omega_a)");
    app.add_option("--lambda", g.lambda, "Lorentzian width");
    app.add_option("--delta", g.delta, "Lorentzian detuning");
    app.add_option("--omega-c", g.omega_c, "Ohmic cutoff");
    app.add_option("--tau-c", g.tau_c_table, "correlation time for tabulated models");
    app.add_option("--engine", g.engine, "bloch | closed | rwa | sa");
    app.add_option("--tmax", g.tmax, "time horizon (units of 1/omega_a)");
    app.add_option("--out", g.out, "output path (default stdout)");
    app.add_option("--format", g.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--workers", g.workers, "worker threads");
    app.add_option("--seed", g.seed, "seed for optimizer restarts");

    auto* c_coeffs = app.add_subcommand("coeffs", "export master-equation coefficients as CSV");
    int stride = 1;
    c_coeffs->add_option("--stride", stride, "grid stride for export");

    auto* c_evolve = app.add_subcommand("evolve", "evolve an initial state, export trajectory CSV");
    std::string state_str{"excited"};
    int out_stride = 10;
    c_evolve->add_option("--state", state_str, "excited | ground | equatorial:<xi> | lx,ly,lz");
    c_evolve->add_option("--stride", out_stride, "output every N steps");

    auto* c_kraus = app.add_subcommand("kraus", "Kraus weights and CPT certificate at given times");
    std::string at_str;
    double cpt_tol = 1e-9;
    c_kraus->add_option("--at", at_str, "comma-separated times")->required();
    c_kraus->add_option("--tol", cpt_tol, "CPT tolerance");

    auto* c_measure = app.add_subcommand("measure", "trace-distance non-Markovianity measure");
    std::string xi0_str{"auto"};
    double horizon_mult = 10.0;
    c_measure->add_option("--xi0", xi0_str, "auto or the equatorial phase in radians");
    c_measure->add_option("--horizon", horizon_mult, "horizon as a multiple of tau_r");
    int polar_pts = 13, azim_pts = 24, restarts = 0;
    c_measure->add_option("--polar-points", polar_pts);
    c_measure->add_option("--azimuth-points", azim_pts);
    c_measure->add_option("--restarts", restarts, "extra seeded random optimizer starts");

    auto* c_sweep = app.add_subcommand("sweep", "parameter sweep to CSV");
    std::string config_path, swept{"delta"}, scale{"lin"};
    double smin = -1.0, smax = 0.5;
    int spoints = 61, cpt_times = 50;
    double horizon_tau_r = 10.0;
    c_sweep->add_option("--config", config_path, "TOML-style config file");
    c_sweep->add_option("--swept", swept, "delta | omega_c");
    c_sweep->add_option("--min", smin);
    c_sweep->add_option("--max", smax);
    c_sweep->add_option("--points", spoints);
    c_sweep->add_option("--scale", scale)->check(CLI::IsMember({"lin", "log"}));
    c_sweep->add_option("--cpt-times", cpt_times, "CPT certification times per point (0 = skip)");
    c_sweep->add_option("--horizon", horizon_tau_r, "horizon as a multiple of tau_r");

    auto* c_analytic = app.add_subcommand("analytic", "asymptotic ratios and the analytic measure");
    double xi0_windows = 0.0;
    int n_windows = 0;
    c_analytic->add_option("--xi0", xi0_windows, "phase for the positivity windows");
    c_analytic->add_option("--windows", n_windows, "number of positivity windows to list");

    auto* c_figure = app.add_subcommand("figure", "emit the data behind a bundled reference figure");
    std::string which;
    int fig_points = 0;
    c_figure->add_option("--which", which, "fig1a|fig1b|fig2a|fig2b|fig3a|fig3b|fig4")->required();
    c_figure->add_option("--points", fig_points, "sweep resolution override");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    std::ofstream file;
    if (*c_coeffs) {
        const auto model = make_model(g);
        const auto coeffs = spectral::build_coefficients(model);
        const double tmax = g.tmax > 0 ? g.tmax : coeffs.t_switch();
        coeffs.export_csv(open_out(g, file), tmax, stride);
        return 0;
    }

    if (*c_evolve) {
        const auto model = make_model(g);
        const auto coeffs = spectral::build_coefficients(model);
        dynamics::EvolutionConfig cfg;
        cfg.engine = parse_engine(g.engine);
        cfg.t_max = g.tmax > 0 ? g.tmax : 10 * model.tau_c();
        cfg.stride = out_stride;
        const auto traj = dynamics::evolve(coeffs, parse_state(state_str), cfg);
        auto& os = open_out(g, file);
        os << "t,lx,ly,lz,rho11_re,rho10_re,rho10_im\n";
        char buf[256];
        for (const auto& p : traj) {
            const auto r10 = p.state.rho10();
            std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", p.t,
                          p.state.lx, p.state.ly, p.state.lz, p.state.rho11(), r10.real(),
                          r10.imag());
            os << buf;
        }
        return 0;
    }

    if (*c_kraus) {
        const auto model = make_model(g);
        std::vector<double> times;
        std::stringstream ss(at_str);
        std::string tok;
        while (std::getline(ss, tok, ',')) times.push_back(std::stod(tok));
        std::sort(times.begin(), times.end());
        if (times.empty()) throw ValidationError("kraus: --at needs at least one time");
        spectral::GridOptions gopt;
        const auto coeffs = spectral::build_coefficients(model, gopt);
        dynamics::EvolutionConfig cfg;
        cfg.engine = dynamics::Engine::FullClosed;
        cfg.t_max = std::max(times.back(), coeffs.grid_step());
        cfg.output_times = times;
        const auto map = dynamics::evolve_map(coeffs, cfg);
        json out = json::array();
        for (const auto& ms : map) {
            const auto kd = chimap::kraus_from_mapstate(ms);
            const auto rep = chimap::check_cpt(kd, cpt_tol);
            out.push_back({{"t", ms.t},
                           {"Lambda", kd.lambda},
                           {"completeness_residual", rep.completeness_residual},
                           {"pass", rep.pass}});
        }
        open_out(g, file) << out.dump(2) << "\n";
        return 0;
    }

    if (*c_measure) {
        const auto model = make_model(g);
        spectral::GridOptions gopt;
        gopt.horizon_tau_r = horizon_mult + 0.5;
        const auto coeffs = spectral::build_coefficients(model, gopt);
        measure::MeasureConfig mc;
        mc.horizon_tau_r = horizon_mult;
        mc.polar_points = polar_pts;
        mc.azimuth_points = azim_pts;
        mc.workers = g.workers;
        mc.seed = g.seed;
        mc.random_restarts = restarts;
        if (xi0_str != "auto") mc.fixed_xi0 = std::stod(xi0_str);
        if (g.tmax > 0) mc.horizon_override = g.tmax;
        const auto res = measure::nonmarkovianity(parse_engine(g.engine), coeffs, mc);
        json intervals = json::array();
        for (const auto& iv : res.intervals)
            intervals.push_back({{"a", iv.a}, {"b", iv.b}, {"gain", iv.gain}});
        json out = {{"N", res.N},
                    {"xi0", res.xi0},
                    {"lambda0", res.lambda0},
                    {"engine", engine_name(res.engine)},
                    {"T", res.T},
                    {"intervals", intervals},
                    {"residual_estimate", res.residual_estimate},
                    {"nu", res.nu},
                    {"mu", res.mu},
                    {"N_ana", res.N_ana}};
        open_out(g, file) << out.dump(2) << "\n";
        return 0;
    }

    if (*c_sweep) {
        sweep::SweepSpec spec;
        if (!config_path.empty()) {
            spec = sweep::load_config(config_path);
        } else {
            spec.family = make_model(g).family;
            spec.swept = swept;
            spec.min = smin;
            spec.max = smax;
            spec.points = spoints;
            spec.log_scale = scale == "log";
            spec.alpha = g.alpha;
            spec.lambda = g.lambda;
            spec.horizon_tau_r = horizon_tau_r;
            spec.cpt_times = cpt_times;
        }
        if (!g.out.empty()) spec.out = g.out;
        spec.workers = g.workers;
        spec.seed = g.seed;
        const auto table = sweep::run_sweep(spec);
        std::ofstream sfile;
        GlobalOpts go = g;
        go.out = spec.out;
        auto& os = open_out(go, sfile);
        if (g.format == "json") {
            json rows = json::array();
            for (const auto& r : table.rows)
                rows.push_back({{"param", r.param},
                                {"nu", r.nu},
                                {"mu", r.mu},
                                {"N_ana", r.n_ana},
                                {"N_full", r.n_full},
                                {"N_rwa", r.n_rwa},
                                {"N_sa", r.n_sa},
                                {"xi0", r.xi0},
                                {"cpt_min_lambda", r.cpt_min_lambda},
                                {"cpt_residual", r.cpt_residual},
                                {"cpt_pass", r.cpt_pass},
                                {"tau_r_over_tau_c", r.tau_r_over_tau_c},
                                {"status", r.status}});
            os << rows.dump(2) << "\n";
        } else {
            sweep::write_sweep_csv(table, os);
        }
        return 0;
    }

    if (*c_analytic) {
        const auto model = make_model(g);
        const auto coeffs = spectral::build_coefficients(model);
        const auto ts = spectral::timescales(model, coeffs);
        const auto am = measure::analytic_measure(coeffs);
        json out = {{"nu", am.nu},
                    {"mu", am.mu},
                    {"theta_inf", am.theta_inf},
                    {"tau_s", ts.tau_s},
                    {"tau_c", ts.tau_c},
                    {"tau_r", ts.tau_r},
                    {"weak_coupling", ts.weak_coupling},
                    {"eps", am.eps},
                    {"f_minus_inf", coeffs.asym().f_minus_inf},
                    {"f_plus_inf", coeffs.asym().f_plus_inf},
                    {"g_inf_re", coeffs.asym().g_inf.real()},
                    {"g_inf_im", coeffs.asym().g_inf.imag()},
                    {"N_ana", coeffs.asym().g_inf.real() > 0 ? measure::n_ana(am) : 0.0},
                    {"extension_valid", model.lorentzian_extension_valid()}};
        if (n_windows > 0) {
            json w = json::array();
            for (const auto& [a, b] : measure::positivity_windows(am, xi0_windows, n_windows))
                w.push_back({{"t_minus", a}, {"t_plus", b}});
            out["windows"] = w;
        }
        open_out(g, file) << out.dump(2) << "\n";
        return 0;
    }

    if (*c_figure) {
        sweep::FigureOptions fo;
        fo.sweep_points = fig_points;
        fo.workers = g.workers;
        sweep::emit_figure_data(sweep::parse_figure_tag(which), open_out(g, file), fo);
        return 0;
    }

    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
