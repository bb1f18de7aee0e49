// spectral.hpp — Spectral densities and master-equation coefficients f±(t), g(t), h(t), Γ(t)

#pragma once

#include <complex>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace sbnm::spectral {

enum class Family { Lorentzian, Ohmic, Tabulated };

// Environment spectral density. Internal units: omega_a = 1.
struct SpectralModel {
    Family family{Family::Lorentzian};
    double omega_a{1.0};   // level splitting
    double alpha{0.0};     // coupling strength
    double lambda{0.0};    // Lorentzian width
    double delta{0.0};     // Lorentzian detuning from omega_a
    double omega_c{0.0};   // Ohmic cutoff
    std::vector<std::pair<double, double>> table;  // tabulated (omega, J) samples
    double tau_c_user{0.0};                        // correlation time for tabulated models

    static SpectralModel lorentzian(double alpha, double lambda, double delta, double omega_a = 1.0);
    static SpectralModel ohmic(double alpha, double omega_c, double omega_a = 1.0);
    static SpectralModel tabulated(std::vector<std::pair<double, double>> samples, double tau_c,
                                   double omega_a = 1.0);
    // Two-column text file (omega, J) in units of omega_a; '#' comments.
    static SpectralModel tabulated_from_file(const std::string& path, double tau_c,
                                             double omega_a = 1.0);

    void validate() const;
    double tau_c() const;
    // Negative-frequency extension of the Lorentzian closed forms is unreliable
    // when (omega_a - delta)/lambda < 5.
    bool lorentzian_extension_valid() const;
};

double eval_spectral_density(const SpectralModel& model, double omega);

// Time-integrated kernel of g_i: g_i(t) = 2 ∫ dω J(ω) gi_kernel(ω; t).
// Finite at ω = ω_A (analytic limit branch).
double gi_kernel(double omega, double t, double omega_a);

enum class FSign { Plus, Minus };

// Per-operation coefficient evaluation. Lorentzian f± use the closed forms
// (negative-frequency extension); Ohmic/Tabulated integrate s analytically and
// then run adaptive Gauss–Kronrod in ω at relative tolerance 1e-8.
double coeff_f(const SpectralModel& model, FSign sign, double t);
std::complex<double> coeff_g(const SpectralModel& model, double t);
double coeff_h(const SpectralModel& model, double t);

struct Asymptotics {
    double f_plus_inf{0}, f_minus_inf{0};
    std::complex<double> g_inf{0};
    double h_inf{0};
    double theta_inf{0};  // g(inf) = |g(inf)| e^{i theta}
    double nu{0};         // |g_i(inf)|/g_r(inf)
    double mu{0};         // |g(inf)|/g_r(inf)
};
Asymptotics asymptotics(const SpectralModel& model);

struct GridOptions {
    double step_divisor{40.0};      // grid step = min(tau_s, tau_c)/step_divisor
    double switch_factor{50.0};     // transient horizon = switch_factor * max(tau_s, tau_c)
    double horizon_tau_r{10.0};     // validity horizon in units of tau_r
};

// Sampled coefficients on a uniform transient grid plus frozen asymptotics beyond.
// All accessors are valid for any t in [0, horizon].
class CoefficientSet {
  public:
    CoefficientSet() = default;

    const SpectralModel& model() const { return model_; }
    const Asymptotics& asym() const { return asym_; }
    double grid_step() const { return dt_; }
    double t_switch() const { return t_switch_; }
    double horizon() const { return horizon_; }
    std::size_t grid_size() const { return f_minus_.size(); }

    double f_plus(double t) const;
    double f_minus(double t) const;
    double g_r(double t) const;
    double g_i(double t) const;
    std::complex<double> g(double t) const;
    double h(double t) const;

    // Γ(t) = 2∫g ds (throws beyond the horizon), Γ^RWA(t) = ∫f₋ ds, ∫h ds.
    std::complex<double> big_gamma(double t) const;
    double gamma_rwa(double t) const;
    double int_h(double t) const;

    // CSV export, header: t,f_plus,f_minus,g_re,g_im,h,Gamma_re,Gamma_im
    void export_csv(std::ostream& os, double t_max, int stride = 1) const;

    const std::vector<std::string>& warnings() const { return warnings_; }

    friend CoefficientSet build_coefficients(const SpectralModel&, const GridOptions&);

  private:
    double sample(const std::vector<double>& arr, double t, double frozen) const;
    double prefix(const std::vector<double>& arr, double t, double slope) const;

    SpectralModel model_;
    Asymptotics asym_;
    double dt_{0}, t_switch_{0}, horizon_{0};
    bool closed_f_{false};  // Lorentzian: f±, Γr, Γ^RWA from closed forms
    std::vector<double> f_plus_, f_minus_, g_i_, h_;
    std::vector<double> gamma_r_, gamma_i_, int_f_minus_, int_h_;  // prefix integrals
    std::vector<std::string> warnings_;
};

CoefficientSet build_coefficients(const SpectralModel& model, const GridOptions& opts = {});

struct Timescales {
    double tau_s{0}, tau_c{0}, tau_r{0};
    bool weak_coupling{false};           // tau_r/tau_c > 100
    bool outside_assumed_regime{false};  // g_r(inf) <= 0
};
Timescales timescales(const SpectralModel& model, const CoefficientSet& coeffs);

namespace detail {
enum class OmegaKernel { FPlus, FMinus, Gi, H };
struct QuadReport {
    double error{0};
    int intervals{0};
};
// The adaptive ω-quadrature route on its own (no Lorentzian closed-form shortcut).
double omega_quadrature(const SpectralModel& model, OmegaKernel kind, double t,
                        QuadReport* report = nullptr);
} // namespace detail

} // namespace sbnm::spectral
