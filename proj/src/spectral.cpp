#include "sbnm/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include <gsl/gsl_sf_expint.h>

#include "sbnm/errors.hpp"
#include "sbnm/quadrature.hpp"

namespace sbnm::spectral {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = 0.577215664901532860606512090082;

// 5-point Gauss–Legendre on [-1,1]
constexpr double gl_x[5] = {-0.906179845938663992797626878299, -0.538469310105683091036314420700,
                            0.0, 0.538469310105683091036314420700, 0.906179845938663992797626878299};
constexpr double gl_w[5] = {0.236926885056189087514264040720, 0.478628670499366468041291514836,
                            0.568888888888888888888888888889, 0.478628670499366468041291514836,
                            0.236926885056189087514264040720};

double lorentz_peak(const SpectralModel& m) { return m.omega_a - m.delta; }

// A(x) = ∫_0^∞ u cos(ux)/(u²+1) du = ½[eˣE₁(x) − e⁻ˣEi(x)], log-singular at x=0.
double ohmic_corr_A(double x) {
    if (x < 1e-3) {
        const double L = kEulerGamma + std::log(x);
        return -L + x * x * (0.75 - 0.5 * L);
    }
    return 0.5 * (gsl_sf_expint_E1_scaled(x) - gsl_sf_expint_Ei_scaled(x));
}

// smooth remainder A(x) + γ + ln(x)
double ohmic_corr_A_smooth(double x) {
    if (x < 1e-3) {
        const double L = kEulerGamma + std::log(x);
        return x * x * (0.75 - 0.5 * L);
    }
    return ohmic_corr_A(x) + kEulerGamma + std::log(x);
}

double table_interp(const std::vector<std::pair<double, double>>& tab, double w) {
    if (tab.empty() || w < tab.front().first || w > tab.back().first) return 0.0;
    auto it = std::lower_bound(tab.begin(), tab.end(), w,
                               [](const auto& p, double x) { return p.first < x; });
    if (it == tab.begin()) return it->second;
    const auto [w1, j1] = *it;
    const auto [w0, j0] = *(it - 1);
    return j0 + (j1 - j0) * (w - w0) / (w1 - w0);
}

// Bath correlation kernels K_c(s) = ∫J cos(ωs)dω, K_s(s) = ∫J sin(ωs)dω.
// Lorentzian uses the negative-frequency extension (closed forms), Ohmic is
// closed via exponential integrals up to the log(s) part handled separately,
// tabulated is summed segment-by-segment.
struct CorrKernels {
    const SpectralModel& m;

    double Kc(double s) const {
        switch (m.family) {
            case Family::Lorentzian:
                return 0.5 * m.alpha * m.lambda * std::exp(-m.lambda * s) * std::cos(lorentz_peak(m) * s);
            case Family::Ohmic:
                return (m.alpha / kPi) * (m.omega_c * m.omega_c / m.omega_a) * ohmic_corr_A(m.omega_c * s);
            case Family::Tabulated:
                return tab_K(s, true);
        }
        return 0.0;
    }
    // Ohmic Kc minus its P·(−γ−ln(ω_c s)) log part; identical to Kc for other families.
    double Kc_smooth(double s) const {
        if (m.family != Family::Ohmic) return Kc(s);
        return (m.alpha / kPi) * (m.omega_c * m.omega_c / m.omega_a) * ohmic_corr_A_smooth(m.omega_c * s);
    }
    double Ks(double s) const {
        switch (m.family) {
            case Family::Lorentzian:
                return 0.5 * m.alpha * m.lambda * std::exp(-m.lambda * s) * std::sin(lorentz_peak(m) * s);
            case Family::Ohmic:
                return 0.5 * m.alpha * (m.omega_c * m.omega_c / m.omega_a) * std::exp(-m.omega_c * s);
            case Family::Tabulated:
                return tab_K(s, false);
        }
        return 0.0;
    }

    double tab_K(double s, bool cosine) const {
        const auto& tab = m.table;
        const double wmax = tab.back().first;
        if (s * wmax < 1e-3) {
            // moment expansion: Kc ≈ M0 − s²M2/2, Ks ≈ sM1 − s³M3/6
            double M[4] = {0, 0, 0, 0};
            for (std::size_t i = 0; i + 1 < tab.size(); ++i) {
                const double w0 = tab[i].first, w1 = tab[i + 1].first;
                const double j0 = tab[i].second, j1 = tab[i + 1].second;
                const double b = (j1 - j0) / (w1 - w0), a = j0 - b * w0;
                for (int k = 0; k < 4; ++k) {
                    const double p1 = (std::pow(w1, k + 1) - std::pow(w0, k + 1)) / (k + 1);
                    const double p2 = (std::pow(w1, k + 2) - std::pow(w0, k + 2)) / (k + 2);
                    M[k] += a * p1 + b * p2;
                }
            }
            return cosine ? M[0] - s * s * M[2] / 2 : s * M[1] - s * s * s * M[3] / 6;
        }
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < tab.size(); ++i) {
            const double w0 = tab[i].first, w1 = tab[i + 1].first;
            const double j0 = tab[i].second, j1 = tab[i + 1].second;
            const double b = (j1 - j0) / (w1 - w0);
            if (cosine) {
                acc += (j1 * std::sin(w1 * s) - j0 * std::sin(w0 * s)) / s +
                       b * (std::cos(w1 * s) - std::cos(w0 * s)) / (s * s);
            } else {
                acc += (-j1 * std::cos(w1 * s) + j0 * std::cos(w0 * s)) / s +
                       b * (std::sin(w1 * s) - std::sin(w0 * s)) / (s * s);
            }
        }
        return acc;
    }
};

// ∫_a^b ln(s) cos(w s) ds  and  ∫_a^b ln(s) sin(w s) ds  (a may be 0)
double int_log_cos(double a, double b, double w) {
    double hi = std::log(b) * std::sin(w * b) / w - gsl_sf_Si(w * b) / w;
    double lo = (a <= 0.0) ? 0.0 : std::log(a) * std::sin(w * a) / w - gsl_sf_Si(w * a) / w;
    return hi - lo;
}
double int_log_sin(double a, double b, double w) {
    double hi = -std::log(b) * std::cos(w * b) / w + gsl_sf_Ci(w * b) / w;
    double lo;
    if (a <= 0.0)
        lo = (kEulerGamma + std::log(w)) / w;  // limit of −ln(s)cos(ws)+Ci(ws) as s→0
    else
        lo = -std::log(a) * std::cos(w * a) / w + gsl_sf_Ci(w * a) / w;
    return hi - lo;
}

// Lorentzian closed forms, Δ-shifted: f(t) = p[1 − e^{−λt}(cos Dt − (D/λ) sin Dt)]
double lorentz_f_closed(double alpha, double lam, double D, double t) {
    const double p = alpha * lam * lam / (D * D + lam * lam);
    return p * (1.0 - std::exp(-lam * t) * (std::cos(D * t) - (D / lam) * std::sin(D * t)));
}
// ∫_0^t of the above
double lorentz_F_closed(double alpha, double lam, double D, double t) {
    const double den = lam * lam + D * D;
    const double p = alpha * lam * lam / den;
    const double e = std::exp(-lam * t);
    const double I = (lam - e * (lam * std::cos(D * t) - D * std::sin(D * t)) -
                      (D / lam) * (D - e * (lam * std::sin(D * t) + D * std::cos(D * t)))) / den;
    return p * (t - I);
}

double gi_kernel_impl(double omega, double t, double wa) {
    const double w = std::abs(omega);  // kernel is even in ω
    const double x = w - wa;
    if (std::abs(x) < 1e-3 * wa) {
        // cancellation-free rearrangement, exact for all x
        const double s = std::sin(wa * t), c = std::cos(wa * t);
        const double q = 0.5 * x * t;
        const double sinc = std::abs(q) < 1e-8 ? 1.0 - q * q / 6.0 : std::sin(q) / q;
        return (wa * (x * t * t / 2.0) * sinc * sinc - s * s * std::cos(x * t) -
                s * c * std::sin(x * t)) / (2.0 * wa + x);
    }
    return (wa - wa * std::cos(w * t) * std::cos(wa * t) - w * std::sin(w * t) * std::sin(wa * t)) /
           (w * w - wa * wa);
}

enum class KernelKind { FPlus, FMinus, Gi, H };

// time-integrated ω-kernels of the dissipative and Lamb-shift rate integrals
double omega_kernel(KernelKind k, double w, double t, double wa) {
    switch (k) {
        case KernelKind::FPlus:
        case KernelKind::FMinus: {
            const double x = (k == KernelKind::FPlus) ? w + wa : w - wa;
            const double q = x * t;
            if (std::abs(q) < 1e-8) return t * (1.0 - q * q / 6.0);
            return std::sin(q) / x;
        }
        case KernelKind::Gi:
            return gi_kernel_impl(w, t, wa);
        case KernelKind::H: {
            const double x = w - wa;
            const double hq = 0.5 * x * t;
            if (std::abs(hq) < 1e-8) return 0.5 * x * t * t;
            const double sh = std::sin(hq);
            return 2.0 * sh * sh / x;
        }
    }
    return 0.0;
}

double kernel_prefactor(KernelKind k) {
    switch (k) {
        case KernelKind::FPlus:
        case KernelKind::FMinus:
        case KernelKind::Gi: return 2.0;
        case KernelKind::H: return 1.0;
    }
    return 0.0;
}

struct Domain {
    double lo, hi;
    std::vector<double> splits;
};

Domain quad_domain(const SpectralModel& m, double t) {
    Domain d;
    switch (m.family) {
        case Family::Lorentzian: {
            const double w0 = lorentz_peak(m);
            double S = std::max({50.0 * m.lambda + std::abs(m.delta) + 3.0 * m.omega_a,
                                 60.0 * m.omega_a,
                                 std::min(6400.0 * m.lambda, 8.0 / std::max(t, 1e-3))});
            d.lo = w0 - S;
            d.hi = w0 + S;
            d.splits = {0.0, m.omega_a, -m.omega_a, w0};
            break;
        }
        case Family::Ohmic:
            d.lo = 0.0;
            d.hi = 50.0 * std::max(m.omega_c, m.omega_a);
            d.splits = {m.omega_a, m.omega_c};
            break;
        case Family::Tabulated:
            d.lo = m.table.front().first;
            d.hi = m.table.back().first;
            d.splits = {m.omega_a};
            break;
    }
    return d;
}

// residual bound for the extended-domain truncation of the Lorentzian path
double tail_bound_far(const SpectralModel& m, KernelKind k, const Domain& d) {
    if (m.family != Family::Lorentzian) return 0.0;
    const double je = std::abs(eval_spectral_density(m, d.hi)) +
                      std::abs(eval_spectral_density(m, d.lo));
    const double S = 0.5 * (d.hi - d.lo);
    return kernel_prefactor(k) * je * (m.omega_a / S + 1.0 / (1.0 + S));
}

// Truncation-tail handling beyond the upper cutoff W (physical-domain models):
// the static kernel parts are integrated exactly in u = 1/ω, the oscillatory
// parts get their leading integration-by-parts term; the next order is an
// error bound, not a correction.
struct TailResult {
    double value{0};
    double bound{0};
};

TailResult omega_tail(const SpectralModel& m, KernelKind k, double t, double W) {
    TailResult out;
    if (m.family == Family::Tabulated || m.family == Family::Lorentzian) return out;  // compact / extended
    const double wa = m.omega_a;
    auto J = [&](double w) { return eval_spectral_density(m, w); };

    quad::Options o;
    o.rel_tol = 1e-10;
    o.abs_tol = 1e-300;
    o.throw_on_failure = false;
    if (k == KernelKind::Gi) {
        // static part ω_A/(ω² − ω_A²)
        out.value += quad::integrate(
                         [&](double u) {
                             const double w = 1.0 / u;
                             return J(w) * wa / (w * w - wa * wa) / (u * u);
                         },
                         1e-9 / W, 1.0 / W, o)
                         .value;
    } else if (k == KernelKind::H) {
        // static part 1/(ω − ω_A)
        out.value += quad::integrate(
                         [&](double u) {
                             const double w = 1.0 / u;
                             return J(w) / (w - wa) / (u * u);
                         },
                         1e-9 / W, 1.0 / W, o)
                         .value;
    }
    const double jW = J(W);
    if (t * (W - wa) > 4.0) {
        switch (k) {
            case KernelKind::FMinus:
                out.value += jW * std::cos((W - wa) * t) / (t * (W - wa));
                break;
            case KernelKind::FPlus:
                out.value += jW * std::cos((W + wa) * t) / (t * (W + wa));
                break;
            case KernelKind::Gi: {
                const double den = W * W - wa * wa;
                out.value += jW * wa * std::cos(wa * t) * std::sin(W * t) / (den * t);
                out.value -= jW * W * std::sin(wa * t) * std::cos(W * t) / (den * t);
                break;
            }
            case KernelKind::H:
                out.value += jW * std::sin((W - wa) * t) / ((W - wa) * t);
                break;
        }
        out.bound = 8.0 * jW / (std::max(W - wa, wa) * t * t) *
                    (1.0 / std::max(W - wa, wa) + 1.0 / W);
    } else {
        out.bound = 4.0 * jW / (std::max(t, 1e-12) * std::max(W - wa, wa));
    }
    return out;
}

double omega_path_coeff(const SpectralModel& m, KernelKind k, double t, quad::Result* rep) {
    if (t == 0.0) return 0.0;
    const Domain d = quad_domain(m, t);
    quad::Options opts;
    opts.rel_tol = 1e-8;
    opts.abs_tol = 1e-14 * m.alpha;  // guards near-zero crossings of the coefficients
    // oscillation-aware seeding: subinterval width ≤ π/(4t) near the spectral mass
    const double osc_w = kPi / (4.0 * t);
    double core_lo = d.lo, core_hi = d.hi;
    if (m.family == Family::Lorentzian) {
        const double w0 = lorentz_peak(m);
        const double W = std::max(10.0 * m.lambda, 3.0 * m.omega_a);
        core_lo = std::max(d.lo, w0 - W);
        core_hi = std::min(d.hi, w0 + W);
    } else if (m.family == Family::Ohmic) {
        core_hi = std::min(d.hi, 4.0 * (m.omega_c + m.omega_a));
    }
    opts.initial_edges = quad::uniform_edges(core_lo, core_hi, std::max(osc_w, (core_hi - core_lo) / 4000.0));
    for (double s : d.splits)
        if (s > d.lo && s < d.hi) opts.initial_edges.push_back(s);
    // geometrically coarsening panels outside the core
    for (double f = 0.02; f < 1.0; f *= 1.6) {
        opts.initial_edges.push_back(core_hi + f * (d.hi - core_hi));
        if (core_lo > d.lo) opts.initial_edges.push_back(core_lo - f * (core_lo - d.lo));
    }

    const double wa = m.omega_a;
    auto f = [&](double w) { return eval_spectral_density(m, w) * omega_kernel(k, w, t, wa); };
    quad::Result r = quad::integrate(f, d.lo, d.hi, opts);
    const TailResult tail = omega_tail(m, k, t, d.hi);
    r.value += tail.value;
    r.error += tail.bound + tail_bound_far(m, k, d);
    if (rep) *rep = r;
    return kernel_prefactor(k) * r.value;
}

} // namespace

SpectralModel SpectralModel::lorentzian(double alpha, double lambda, double delta, double omega_a) {
    SpectralModel m;
    m.family = Family::Lorentzian;
    m.alpha = alpha;
    m.lambda = lambda;
    m.delta = delta;
    m.omega_a = omega_a;
    m.validate();
    return m;
}

SpectralModel SpectralModel::ohmic(double alpha, double omega_c, double omega_a) {
    SpectralModel m;
    m.family = Family::Ohmic;
    m.alpha = alpha;
    m.omega_c = omega_c;
    m.omega_a = omega_a;
    m.validate();
    return m;
}

SpectralModel SpectralModel::tabulated(std::vector<std::pair<double, double>> samples, double tau_c,
                                       double omega_a) {
    SpectralModel m;
    m.family = Family::Tabulated;
    m.table = std::move(samples);
    m.tau_c_user = tau_c;
    m.omega_a = omega_a;
    m.validate();
    return m;
}

SpectralModel SpectralModel::tabulated_from_file(const std::string& path, double tau_c,
                                                 double omega_a) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open tabulated spectral density file: " + path);
    std::vector<std::pair<double, double>> samples;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        double w, j;
        if (ls >> w >> j)
            samples.emplace_back(w, j);
        else if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos)
            throw ValidationError(path + ":" + std::to_string(lineno) + ": expected two columns (omega, J)");
    }
    return tabulated(std::move(samples), tau_c, omega_a);
}

void SpectralModel::validate() const {
    if (!(omega_a > 0)) throw ValidationError("omega_a must be positive");
    switch (family) {
        case Family::Lorentzian:
            if (!(alpha > 0)) throw ValidationError("alpha must be positive");
            if (!(lambda > 0)) throw ValidationError("lambda must be positive");
            break;
        case Family::Ohmic:
            if (!(alpha > 0)) throw ValidationError("alpha must be positive");
            if (!(omega_c > 0)) throw ValidationError("omega_c must be positive");
            break;
        case Family::Tabulated: {
            if (table.empty()) throw ValidationError("tabulated spectral density has no samples");
            if (table.front().first != 0.0)
                throw ValidationError("tabulated spectral density must start at omega = 0");
            for (std::size_t i = 0; i < table.size(); ++i) {
                if (table[i].second < 0)
                    throw ValidationError("tabulated J values must be nonnegative");
                if (i > 0 && !(table[i].first > table[i - 1].first))
                    throw ValidationError("tabulated omegas must be strictly increasing");
            }
            if (!(tau_c_user > 0))
                throw ValidationError("tabulated model needs a user-supplied tau_c > 0");
            if (table.back().first <= omega_a)
                throw ValidationError("tabulated domain must extend beyond omega_a");
            break;
        }
    }
}

double SpectralModel::tau_c() const {
    switch (family) {
        case Family::Lorentzian: return 1.0 / lambda;
        case Family::Ohmic: return 1.0 / omega_c;
        case Family::Tabulated: return tau_c_user;
    }
    return 0.0;
}

bool SpectralModel::lorentzian_extension_valid() const {
    if (family != Family::Lorentzian) return true;
    return (omega_a - delta) / lambda >= 5.0;
}

double eval_spectral_density(const SpectralModel& m, double omega) {
    switch (m.family) {
        case Family::Lorentzian: {
            const double x = omega + m.delta - m.omega_a;
            return (m.alpha / (2 * kPi)) * m.lambda * m.lambda / (x * x + m.lambda * m.lambda);
        }
        case Family::Ohmic:
            if (omega < 0) throw ValidationError("Ohmic spectral density needs omega >= 0");
            return (m.alpha / kPi) * (omega / m.omega_a) * m.omega_c * m.omega_c /
                   (omega * omega + m.omega_c * m.omega_c);
        case Family::Tabulated:
            if (omega < 0) throw ValidationError("tabulated spectral density needs omega >= 0");
            if (m.table.empty()) throw ValidationError("tabulated spectral density has no samples");
            return table_interp(m.table, omega);
    }
    throw ValidationError("unknown spectral density variant");
}

double gi_kernel(double omega, double t, double omega_a) {
    if (omega < 0) throw ValidationError("gi_kernel needs omega >= 0");
    if (t < 0) throw ValidationError("gi_kernel needs t >= 0");
    return gi_kernel_impl(omega, t, omega_a);
}

double coeff_f(const SpectralModel& m, FSign sign, double t) {
    if (!std::isfinite(t) || t < 0) throw ValidationError("coeff_f needs finite t >= 0");
    if (t == 0.0) return 0.0;
    if (m.family == Family::Lorentzian) {
        const double D = (sign == FSign::Minus) ? m.delta : m.delta - 2 * m.omega_a;
        return lorentz_f_closed(m.alpha, m.lambda, D, t);
    }
    return omega_path_coeff(m, sign == FSign::Minus ? KernelKind::FMinus : KernelKind::FPlus, t,
                            nullptr);
}

namespace detail {
double omega_quadrature(const SpectralModel& model, OmegaKernel kind, double t,
                        QuadReport* report) {
    if (!std::isfinite(t) || t < 0) throw ValidationError("omega_quadrature needs finite t >= 0");
    if (t == 0.0) return 0.0;
    KernelKind k{};
    switch (kind) {
        case OmegaKernel::FPlus: k = KernelKind::FPlus; break;
        case OmegaKernel::FMinus: k = KernelKind::FMinus; break;
        case OmegaKernel::Gi: k = KernelKind::Gi; break;
        case OmegaKernel::H: k = KernelKind::H; break;
    }
    quad::Result r;
    const double v = omega_path_coeff(model, k, t, &r);
    if (report) *report = {r.error, r.intervals};
    return v;
}
} // namespace detail

std::complex<double> coeff_g(const SpectralModel& m, double t) {
    if (!std::isfinite(t) || t < 0) throw ValidationError("coeff_g needs finite t >= 0");
    if (t == 0.0) return {0.0, 0.0};
    const double re = 0.5 * (coeff_f(m, FSign::Plus, t) + coeff_f(m, FSign::Minus, t));
    const double im = omega_path_coeff(m, KernelKind::Gi, t, nullptr);
    return {re, im};
}

double coeff_h(const SpectralModel& m, double t) {
    if (!std::isfinite(t) || t < 0) throw ValidationError("coeff_h needs finite t >= 0");
    if (t == 0.0) return 0.0;
    return omega_path_coeff(m, KernelKind::H, t, nullptr);
}

Asymptotics asymptotics(const SpectralModel& m) {
    Asymptotics a;
    const double wa = m.omega_a;
    switch (m.family) {
        case Family::Lorentzian: {
            a.f_minus_inf = 2 * kPi * eval_spectral_density(m, wa);
            a.f_plus_inf = 2 * kPi * eval_spectral_density(m, -wa);
            const double gi = kPi * (-(m.delta / m.lambda) * eval_spectral_density(m, wa) +
                                     ((m.delta - 2 * wa) / m.lambda) * eval_spectral_density(m, -wa));
            a.g_inf = {0.5 * (a.f_plus_inf + a.f_minus_inf), gi};
            a.h_inf = -0.5 * m.alpha * m.lambda * m.delta / (m.delta * m.delta + m.lambda * m.lambda);
            break;
        }
        case Family::Ohmic: {
            const double jwa = eval_spectral_density(m, wa);
            a.f_minus_inf = 2 * kPi * jwa;
            a.f_plus_inf = 0.0;
            a.g_inf = kPi * jwa * std::complex<double>(1.0, -(2.0 / kPi) * std::log(wa / m.omega_c));
            // PV over a finite window plus the analytic 1/ω² tail of J/(ω−ω_A)
            const double Omega = 2000.0 * std::max(m.omega_c, wa);
            quad::Options o;
            o.rel_tol = 1e-10;
            a.h_inf = quad::principal_value([&](double w) { return eval_spectral_density(m, w); },
                                            0.0, Omega, wa, o);
            a.h_inf += (m.alpha / kPi) * (m.omega_c * m.omega_c / wa) / Omega;
            break;
        }
        case Family::Tabulated: {
            a.f_minus_inf = 2 * kPi * table_interp(m.table, wa);
            a.f_plus_inf = 0.0;
            const double lo = m.table.front().first, hi = m.table.back().first;
            quad::Options o;
            o.rel_tol = 1e-10;
            const double gi =
                2.0 * quad::principal_value(
                          [&](double w) { return table_interp(m.table, w) * wa / (w + wa); }, lo, hi,
                          wa, o);
            a.g_inf = {0.5 * a.f_minus_inf, gi};
            a.h_inf = quad::principal_value([&](double w) { return table_interp(m.table, w); }, lo,
                                            hi, wa, o);
            break;
        }
    }
    const double gr = a.g_inf.real(), gi = a.g_inf.imag();
    a.theta_inf = std::atan2(gi, gr);
    if (gr > 0) {
        a.nu = std::abs(gi) / gr;
        a.mu = std::abs(a.g_inf) / gr;
    } else {
        a.nu = a.mu = std::numeric_limits<double>::infinity();
    }
    return a;
}

double CoefficientSet::sample(const std::vector<double>& arr, double t, double frozen) const {
    if (t >= t_switch_) return frozen;
    if (t <= 0) return arr.front();
    const double x = t / dt_;
    const auto n = static_cast<long>(arr.size()) - 1;
    long i0 = static_cast<long>(x) - 1;
    i0 = std::clamp(i0, 0L, n - 3);
    const double u = x - i0;
    const double l0 = -(u - 1) * (u - 2) * (u - 3) / 6.0;
    const double l1 = u * (u - 2) * (u - 3) / 2.0;
    const double l2 = -u * (u - 1) * (u - 3) / 2.0;
    const double l3 = u * (u - 1) * (u - 2) / 6.0;
    return l0 * arr[i0] + l1 * arr[i0 + 1] + l2 * arr[i0 + 2] + l3 * arr[i0 + 3];
}

double CoefficientSet::prefix(const std::vector<double>& arr, double t, double slope) const {
    if (t >= t_switch_) return arr.back() + slope * (t - t_switch_);
    return sample(arr, t, arr.back());
}

double CoefficientSet::f_plus(double t) const {
    if (closed_f_) return lorentz_f_closed(model_.alpha, model_.lambda, model_.delta - 2 * model_.omega_a, t);
    return sample(f_plus_, t, asym_.f_plus_inf);
}

double CoefficientSet::f_minus(double t) const {
    if (closed_f_) return lorentz_f_closed(model_.alpha, model_.lambda, model_.delta, t);
    return sample(f_minus_, t, asym_.f_minus_inf);
}

double CoefficientSet::g_r(double t) const { return 0.5 * (f_plus(t) + f_minus(t)); }

double CoefficientSet::g_i(double t) const { return sample(g_i_, t, asym_.g_inf.imag()); }

std::complex<double> CoefficientSet::g(double t) const { return {g_r(t), g_i(t)}; }

double CoefficientSet::h(double t) const { return sample(h_, t, asym_.h_inf); }

std::complex<double> CoefficientSet::big_gamma(double t) const {
    if (t < 0 || t > horizon_ * (1 + 1e-12))
        throw ValidationError("big_gamma: t outside the coefficient horizon");
    double gr;
    if (closed_f_) {
        gr = lorentz_F_closed(model_.alpha, model_.lambda, model_.delta, t) +
             lorentz_F_closed(model_.alpha, model_.lambda, model_.delta - 2 * model_.omega_a, t);
    } else {
        gr = prefix(gamma_r_, t, 2.0 * asym_.g_inf.real());
    }
    return {gr, prefix(gamma_i_, t, 2.0 * asym_.g_inf.imag())};
}

double CoefficientSet::gamma_rwa(double t) const {
    if (closed_f_) return lorentz_F_closed(model_.alpha, model_.lambda, model_.delta, t);
    return prefix(int_f_minus_, t, asym_.f_minus_inf);
}

double CoefficientSet::int_h(double t) const { return prefix(int_h_, t, asym_.h_inf); }

void CoefficientSet::export_csv(std::ostream& os, double t_max, int stride) const {
    os << "t,f_plus,f_minus,g_re,g_im,h,Gamma_re,Gamma_im\n";
    const double tend = std::min(t_max, horizon_);
    char buf[320];
    for (double t = 0.0; t <= tend * (1 + 1e-12); t += dt_ * stride) {
        const auto G = big_gamma(t);
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", t,
                      f_plus(t), f_minus(t), g_r(t), g_i(t), h(t), G.real(), G.imag());
        os << buf;
    }
}

CoefficientSet build_coefficients(const SpectralModel& model, const GridOptions& opts) {
    model.validate();
    CoefficientSet c;
    c.model_ = model;
    c.asym_ = asymptotics(model);

    const double tau_s = 1.0 / model.omega_a;
    const double tau_c = model.tau_c();
    c.dt_ = std::min(tau_s, tau_c) / opts.step_divisor;
    c.t_switch_ = opts.switch_factor * std::max(tau_s, tau_c);
    const double gr_inf = c.asym_.g_inf.real();
    const double tau_r = gr_inf > 0 ? 1.0 / gr_inf : std::numeric_limits<double>::infinity();
    c.horizon_ = std::max(c.t_switch_, std::min(opts.horizon_tau_r * tau_r, 1e9 * tau_s));
    c.closed_f_ = (model.family == Family::Lorentzian);

    if (!model.lorentzian_extension_valid())
        c.warnings_.push_back("Lorentzian negative-frequency extension unreliable: (omega_a - delta)/lambda < 5");
    if (gr_inf <= 0)
        c.warnings_.push_back("g_r(inf) <= 0: outside the assumed relaxation regime");

    const std::size_t n = static_cast<std::size_t>(std::ceil(c.t_switch_ / c.dt_));
    c.t_switch_ = n * c.dt_;  // land the switch on a grid node
    const double wa = model.omega_a;
    const CorrKernels K{model};

    c.f_plus_.assign(n + 1, 0.0);
    c.f_minus_.assign(n + 1, 0.0);
    c.g_i_.assign(n + 1, 0.0);
    c.h_.assign(n + 1, 0.0);

    // cumulative s-integration of the correlation kernels, 5-pt Gauss per cell;
    // the Ohmic log(s) part is integrated analytically
    const bool logpart = (model.family == Family::Ohmic);
    const double P = logpart ? (model.alpha / kPi) * model.omega_c * model.omega_c / model.omega_a : 0.0;
    const double logC = logpart ? -(kEulerGamma + std::log(model.omega_c)) : 0.0;
    double fp = 0, fm = 0, gi = 0, hh = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double a = k * c.dt_, b = (k + 1) * c.dt_;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        double dcos = 0, dsin = 0, dks_cos = 0, dks_sin = 0;  // ∫Kc·cos, ∫Kc·sin, ∫Ks·cos, ∫Ks·sin
        for (int q = 0; q < 5; ++q) {
            const double s = mid + half * gl_x[q];
            const double wq = gl_w[q] * half;
            const double kc = K.Kc_smooth(s), ks = K.Ks(s);
            const double cs = std::cos(wa * s), sn = std::sin(wa * s);
            dcos += wq * kc * cs;
            dsin += wq * kc * sn;
            dks_cos += wq * ks * cs;
            dks_sin += wq * ks * sn;
        }
        if (logpart) {
            // K_c log part: P (logC − ln s); analytic cell integrals against cos/sin
            const double icos = (std::sin(wa * b) - std::sin(wa * a)) / wa;
            const double isin = (std::cos(wa * a) - std::cos(wa * b)) / wa;
            dcos += P * (logC * icos - int_log_cos(a, b, wa));
            dsin += P * (logC * isin - int_log_sin(a, b, wa));
        }
        fm += 2.0 * (dcos + dks_sin);
        fp += 2.0 * (dcos - dks_sin);
        gi += -2.0 * dsin;
        hh += dks_cos - dsin;
        c.f_minus_[k + 1] = fm;
        c.f_plus_[k + 1] = fp;
        c.g_i_[k + 1] = gi;
        c.h_[k + 1] = hh;
    }

    // prefix integrals of the sampled coefficients (4-point Newton–Cotes per cell)
    auto cumulate = [&](const std::vector<double>& y) {
        std::vector<double> out(y.size(), 0.0);
        const double d = c.dt_;
        for (std::size_t k = 0; k + 1 < y.size(); ++k) {
            double cell;
            if (k == 0)
                cell = d * (9 * y[0] + 19 * y[1] - 5 * y[2] + y[3]) / 24.0;
            else if (k + 2 >= y.size())
                cell = d * (y[k - 2] - 5 * y[k - 1] + 19 * y[k] + 9 * y[k + 1]) / 24.0;
            else
                cell = d * (-y[k - 1] + 13 * y[k] + 13 * y[k + 1] - y[k + 2]) / 24.0;
            out[k + 1] = out[k] + cell;
        }
        return out;
    };
    std::vector<double> gr_samples(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        if (c.closed_f_) {
            // keep the sampled arrays exact for export and tests
            const double t = k * c.dt_;
            c.f_minus_[k] = lorentz_f_closed(model.alpha, model.lambda, model.delta, t);
            c.f_plus_[k] = lorentz_f_closed(model.alpha, model.lambda, model.delta - 2 * wa, t);
        }
        gr_samples[k] = c.f_plus_[k] + c.f_minus_[k];  // 2 g_r
    }
    c.gamma_r_ = cumulate(gr_samples);
    std::vector<double> gi2(n + 1);
    for (std::size_t k = 0; k <= n; ++k) gi2[k] = 2.0 * c.g_i_[k];
    c.gamma_i_ = cumulate(gi2);
    c.int_f_minus_ = cumulate(c.f_minus_);
    c.int_h_ = cumulate(c.h_);
    return c;
}

Timescales timescales(const SpectralModel& model, const CoefficientSet& coeffs) {
    Timescales ts;
    ts.tau_s = 1.0 / model.omega_a;
    ts.tau_c = model.tau_c();
    const double gr = coeffs.asym().g_inf.real();
    if (gr > 0) {
        ts.tau_r = 1.0 / gr;
    } else {
        ts.tau_r = std::numeric_limits<double>::infinity();
        ts.outside_assumed_regime = true;
    }
    ts.weak_coupling = ts.tau_r / ts.tau_c > 100.0;
    return ts;
}

} // namespace sbnm::spectral
