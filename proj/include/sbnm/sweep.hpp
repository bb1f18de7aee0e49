// sweep.hpp — Parameter sweeps, figure data emission, config parsing

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sbnm/measure.hpp"
#include "sbnm/spectral.hpp"

namespace sbnm::sweep {

inline constexpr const char* kToolkitVersion = "0.1.0";

struct SweepSpec {
    spectral::Family family{spectral::Family::Lorentzian};
    std::string swept{"delta"};  // "delta" (Lorentzian) or "omega_c" (Ohmic)
    double min{-1.0}, max{0.5};
    int points{61};
    bool log_scale{false};
    double alpha{0.01};
    double lambda{0.1};    // Lorentzian only
    double omega_c{1.0};   // Ohmic only (fixed when sweeping delta — unused then)
    bool do_full{true}, do_rwa{true}, do_sa{true};
    std::string out{"sweep.csv"};
    int workers{1};
    unsigned long long seed{0};
    double horizon_tau_r{10.0};
    // desk-scale knobs for the measure optimizer
    int polar_points{13};
    int azimuth_points{24};
    int cpt_times{50};

    void validate() const;
    std::vector<double> values() const;  // swept parameter values, ordered
};

// TOML-style `key = value` file; '#' comments; unknown keys rejected.
SweepSpec load_config(const std::string& path);

struct SweepRow {
    double param{0};
    double nu{0}, mu{0};
    double n_ana{0};
    double n_full{-1}, n_rwa{-1}, n_sa{-1};  // −1 = not evaluated
    double xi0{0};
    double cpt_min_lambda{0}, cpt_residual{0};
    bool cpt_pass{false};
    double tau_r_over_tau_c{0};
    bool extension_valid{true};
    std::string status{"ok"};
};

struct SweepTable {
    SweepSpec spec;
    std::vector<SweepRow> rows;
};

SweepTable run_sweep(const SweepSpec& spec);

void write_sweep_csv(const SweepTable& table, std::ostream& os);

// Regenerates the data behind one of the bundled reference figures.
enum class FigureTag { Fig1a, Fig1b, Fig2a, Fig2b, Fig3a, Fig3b, Fig4 };
FigureTag parse_figure_tag(const std::string& name);

struct FigureOptions {
    int sweep_points{0};  // 0 → figure default
    int workers{1};
    double horizon_tau_r{10.0};
};

void emit_figure_data(FigureTag which, std::ostream& os, const FigureOptions& opts = {});

} // namespace sbnm::sweep
