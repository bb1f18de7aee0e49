#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sbnm/errors.hpp"
#include "sbnm/spectral.hpp"
#include "oracles.hpp"

using namespace sbnm;
using namespace sbnm::spectral;

namespace {
constexpr double kPi = std::numbers::pi;
const SpectralModel fig2 = SpectralModel::lorentzian(0.01, 0.1, -0.9);

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }
} // namespace

TEST_CASE("spectral density evaluation") {
    CHECK(eval_spectral_density(fig2, 1.9) == doctest::Approx(0.01 / (2 * kPi)).epsilon(1e-12));
    CHECK(eval_spectral_density(fig2, 1.9) == doctest::Approx(1.5915e-3).epsilon(1e-4));
    CHECK(eval_spectral_density(fig2, 1.0) ==
          doctest::Approx((0.01 / (2 * kPi)) * (0.01 / 0.82)).epsilon(1e-12));
    CHECK(eval_spectral_density(fig2, 1.0) == doctest::Approx(1.9409e-5).epsilon(1e-4));

    const auto oh = SpectralModel::ohmic(0.01, 1.0);
    CHECK(eval_spectral_density(oh, 0.0) == 0.0);
    CHECK(eval_spectral_density(oh, 1.0) == doctest::Approx(0.01 / (2 * kPi)).epsilon(1e-12));
    CHECK_THROWS_AS(eval_spectral_density(oh, -0.5), ValidationError);

    SpectralModel empty_tab;
    empty_tab.family = Family::Tabulated;
    CHECK_THROWS_AS(eval_spectral_density(empty_tab, 1.0), ValidationError);
}

TEST_CASE("model validation") {
    CHECK_THROWS_AS(SpectralModel::lorentzian(-0.01, 0.1, 0.0), ValidationError);
    CHECK_THROWS_AS(SpectralModel::lorentzian(0.01, 0.0, 0.0), ValidationError);
    CHECK_THROWS_AS(SpectralModel::ohmic(0.01, -1.0), ValidationError);
    CHECK_THROWS_AS(SpectralModel::tabulated({}, 1.0), ValidationError);
    CHECK_THROWS_AS(SpectralModel::tabulated({{0.0, 0.0}, {1.0, -0.5}, {2.0, 0.0}}, 1.0),
                    ValidationError);
    CHECK_THROWS_AS(SpectralModel::tabulated({{0.0, 0.0}, {1.0, 0.1}, {1.0, 0.2}}, 1.0),
                    ValidationError);
    CHECK_THROWS_AS(SpectralModel::tabulated({{0.1, 0.0}, {2.0, 0.1}}, 1.0), ValidationError);
    CHECK(SpectralModel::lorentzian(0.01, 0.1, -0.9).lorentzian_extension_valid());
    CHECK_FALSE(SpectralModel::lorentzian(0.01, 0.3, 0.5).lorentzian_extension_valid());
}

TEST_CASE("tabulated file loading and interpolation") {
    const char* path = "/tmp/sbnm_test_table.txt";
    {
        std::ofstream out(path);
        out << "# test spectral density\n0 0\n0.5 0.002   # rising\n1.5 0.004\n3.0 0\n";
    }
    const auto m = SpectralModel::tabulated_from_file(path, 2.0);
    CHECK(eval_spectral_density(m, 0.25) == doctest::Approx(0.001));
    CHECK(eval_spectral_density(m, 1.0) == doctest::Approx(0.003));
    CHECK(eval_spectral_density(m, 5.0) == 0.0);  // outside the domain
    CHECK(m.tau_c() == 2.0);
}

TEST_CASE("coefficient ops: trivial zeros and error paths") {
    CHECK(coeff_f(fig2, FSign::Minus, 0.0) == 0.0);
    CHECK(coeff_f(fig2, FSign::Plus, 0.0) == 0.0);
    CHECK(coeff_g(fig2, 0.0) == std::complex<double>(0.0, 0.0));
    CHECK(coeff_h(fig2, 0.0) == 0.0);
    CHECK_THROWS_AS(coeff_f(fig2, FSign::Minus, std::nan("")), ValidationError);
    CHECK_THROWS_AS(coeff_f(fig2, FSign::Minus, -1.0), ValidationError);
}

TEST_CASE("Lorentzian asymptotics (closed forms)") {
    const auto a = asymptotics(fig2);
    CHECK(a.f_minus_inf == doctest::Approx(1e-4 / 0.82).epsilon(1e-12));
    CHECK(a.f_minus_inf == doctest::Approx(1.2195e-4).epsilon(1e-4));
    CHECK(a.f_plus_inf == doctest::Approx(1e-4 / 8.42).epsilon(1e-12));
    CHECK(a.g_inf.real() == doctest::Approx(0.5 * (a.f_plus_inf + a.f_minus_inf)).epsilon(1e-14));
    CHECK(a.g_inf.imag() == doctest::Approx(3.7657146168e-4).epsilon(1e-9));
    CHECK(a.h_inf == doctest::Approx(0.00045 / 0.82).epsilon(1e-12));
    CHECK(a.nu == doctest::Approx(5.6277056277).epsilon(1e-9));
    // finite-t closed form approaches the asymptote
    CHECK(rel(coeff_f(fig2, FSign::Minus, 200.0), a.f_minus_inf) < 1e-7);
}

TEST_CASE("Ohmic asymptotics") {
    const auto a1 = asymptotics(SpectralModel::ohmic(0.01, 1.0));
    CHECK(a1.g_inf.real() == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(a1.g_inf.imag() == doctest::Approx(0.0));
    CHECK(a1.f_minus_inf == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(a1.f_plus_inf == 0.0);

    const auto m10 = SpectralModel::ohmic(0.01, 10.0);
    const auto a10 = asymptotics(m10);
    const double jwa = eval_spectral_density(m10, 1.0);
    CHECK(a10.g_inf.imag() == doctest::Approx(2 * jwa * std::log(10.0)).epsilon(1e-12));
    CHECK(rel(coeff_f(m10, FSign::Minus, 300.0), a10.f_minus_inf) < 1e-4);
}

TEST_CASE("gi kernel") {
    CHECK(gi_kernel(0.7, 0.0, 1.0) == 0.0);
    for (double t : {0.3, 2.0, 17.0})
        CHECK(gi_kernel(1.0, t, 1.0) ==
              doctest::Approx(-std::sin(t) * std::sin(t) / 2.0).epsilon(1e-12));
    // approximately odd in ω − ω_A for t ≫ τ_s
    const double d = 0.005, t = 100.0;
    const double up = gi_kernel(1.0 + d, t, 1.0), dn = gi_kernel(1.0 - d, t, 1.0);
    CHECK(std::abs(up + dn) < 0.05 * std::max(std::abs(up), std::abs(dn)));
    // branch continuity: stable rearrangement vs the direct formula at the
    // |ω − ω_A| = 1e-3 ω_A switch point
    auto direct = [](double w, double tt) {
        return (1.0 - std::cos(w * tt) * std::cos(tt) - w * std::sin(w * tt) * std::sin(tt)) /
               (w * w - 1.0);
    };
    for (double sgn : {-1.0, 1.0})
        for (double tt : {3.0, 50.0}) {
            const double w = 1.0 + sgn * 0.9999e-3;  // inside the stable branch
            CHECK(std::abs(gi_kernel(w, tt, 1.0) - direct(w, tt)) < 1e-9);
        }
}

TEST_CASE("closed forms vs the adaptive omega-quadrature path") {
    // valid extension regime: (omega_a - delta)/lambda = 19
    for (double t : {1.0, 2.0, 5.0, 20.0, 50.0}) {
        const double fm_closed = coeff_f(fig2, FSign::Minus, t);
        const double fp_closed = coeff_f(fig2, FSign::Plus, t);
        const double fm_quad = detail::omega_quadrature(fig2, detail::OmegaKernel::FMinus, t);
        const double fp_quad = detail::omega_quadrature(fig2, detail::OmegaKernel::FPlus, t);
        const double scale = std::max({std::abs(fm_closed), std::abs(fp_closed), 1.2195e-4});
        CHECK(std::abs(fm_closed - fm_quad) < 1e-5 * scale);
        CHECK(std::abs(fp_closed - fp_quad) < 1e-5 * scale);
    }
    // g_i(∞) closed form (A3) vs the quadrature path at t ≫ τ_c
    const auto a = asymptotics(fig2);
    const double gi400 = detail::omega_quadrature(fig2, detail::OmegaKernel::Gi, 400.0);
    CHECK(rel(gi400, a.g_inf.imag()) < 1e-5);
}

TEST_CASE("frozen oracle values at the Fig-2 parameters") {
    // s-domain Simpson oracle, omega-domain quadrature, and the grid all agree
    CHECK(rel(detail::omega_quadrature(fig2, detail::OmegaKernel::Gi, 10.0), 5.0242973457e-4) < 1e-6);
    CHECK(rel(oracle::g_imag(fig2, 10.0), 5.0242973457e-4) < 1e-7);
    CHECK(rel(oracle::g_imag(fig2, 50.0), 3.7532370181e-4) < 1e-7);
    CHECK(rel(coeff_h(fig2, 50.0), 5.4648843486e-4) < 1e-6);
    CHECK(rel(oracle::h_coeff(fig2, 50.0), 5.4648843486e-4) < 1e-7);
    CHECK(rel(coeff_h(fig2, 10.0), 7.2347956745e-4) < 1e-6);
    // Lorentzian Δ=0 with the symmetric extended range: h(∞) = 0
    const auto sym = SpectralModel::lorentzian(0.01, 0.1, 0.0);
    CHECK(asymptotics(sym).h_inf == 0.0);
    CHECK(std::abs(build_coefficients(sym).h(300.0)) < 1e-12 * sym.alpha);
}

TEST_CASE("coefficient grid matches the per-op route and the oracle") {
    SUBCASE("lorentzian") {
        const auto c = build_coefficients(fig2);
        for (double t : {0.5, 3.0, 12.0, 47.0, 180.0}) {
            CHECK(rel(c.f_minus(t), coeff_f(fig2, FSign::Minus, t)) < 1e-12);  // closed both ways
            CHECK(std::abs(c.g_i(t) - oracle::g_imag(fig2, t)) < 1e-7 * 3.8e-4);
            CHECK(std::abs(c.h(t) - oracle::h_coeff(fig2, t)) < 1e-7 * 5.5e-4);
        }
    }
    SUBCASE("ohmic") {
        const auto m = SpectralModel::ohmic(0.01, 2.0);
        const auto c = build_coefficients(m);
        const double scale = c.asym().f_minus_inf;
        for (double t : {0.37, 1.1, 4.9, 13.0, 40.0}) {
            CHECK(std::abs(c.f_minus(t) - oracle::f_minus(m, t)) < 1e-7 * scale);
            CHECK(std::abs(c.f_plus(t) - oracle::f_plus(m, t)) < 1e-7 * scale);
            CHECK(std::abs(c.g_i(t) - oracle::g_imag(m, t)) < 1e-7 * scale);
            CHECK(std::abs(c.h(t) - oracle::h_coeff(m, t)) < 1e-7 * scale);
            // the per-op omega path agrees within its own reported uncertainty
            // (quadrature tolerance plus the cutoff-tail remainder bound)
            for (auto [kind, ref] :
                 {std::pair{detail::OmegaKernel::FMinus, oracle::f_minus(m, t)},
                  std::pair{detail::OmegaKernel::Gi, oracle::g_imag(m, t)},
                  std::pair{detail::OmegaKernel::H, oracle::h_coeff(m, t)}}) {
                detail::QuadReport rep;
                const double v = detail::omega_quadrature(m, kind, t, &rep);
                CHECK(std::abs(v - ref) < 1e-7 * scale + 3.0 * rep.error);
            }
        }
        // away from the kernel transient the omega path is tight outright
        for (double t : {4.9, 13.0, 40.0})
            CHECK(std::abs(detail::omega_quadrature(m, detail::OmegaKernel::FMinus, t) -
                           oracle::f_minus(m, t)) < 2e-7 * scale);
        // invariant: g_r = (f+ + f-)/2 against the independent route
        for (double t : {0.37, 4.9, 40.0})
            CHECK(std::abs(c.g_r(t) - 0.5 * (oracle::f_plus(m, t) + oracle::f_minus(m, t))) <
                  1e-7 * scale);
    }
}

TEST_CASE("coefficients reach their asymptotics") {
    for (const auto& m : {fig2, SpectralModel::ohmic(0.01, 0.5), SpectralModel::ohmic(0.01, 2.0),
                          SpectralModel::ohmic(0.01, 10.0)}) {
        const auto c = build_coefficients(m);
        const double t10 = 10.0 * std::max(m.tau_c(), 1.0 / m.omega_a);
        CHECK(rel(c.f_minus(t10), c.asym().f_minus_inf) < 0.01);
        const auto g10 = c.g(t10);
        CHECK(std::abs(g10 - c.asym().g_inf) < 0.01 * std::abs(c.asym().g_inf));
    }
}

TEST_CASE("mu-nu identity and timescales") {
    for (const auto& m : {fig2, SpectralModel::ohmic(0.01, 0.5), SpectralModel::ohmic(0.02, 3.0),
                          SpectralModel::lorentzian(0.005, 0.2, 0.3)}) {
        const auto a = asymptotics(m);
        if (a.g_inf.real() > 0) {
            CHECK(std::abs(a.mu * a.mu - (1.0 + a.nu * a.nu)) < 1e-9);
            CHECK(a.mu >= 1.0);
        }
    }
    const auto c = build_coefficients(fig2);
    const auto ts = timescales(fig2, c);
    CHECK(ts.tau_s == 1.0);
    CHECK(ts.tau_c == doctest::Approx(10.0));
    CHECK(ts.tau_r / ts.tau_c == doctest::Approx(1494.4589).epsilon(1e-4));
    CHECK(ts.weak_coupling);
}

TEST_CASE("big_gamma: zero start, linear asymptote, horizon guard") {
    const auto c = build_coefficients(fig2);
    CHECK(c.big_gamma(0.0) == std::complex<double>(0.0, 0.0));
    const auto g1 = c.big_gamma(1000.0), g2 = c.big_gamma(3000.0);
    const double slope = (g2.real() - g1.real()) / 2000.0;
    CHECK(rel(slope, 2.0 * c.asym().g_inf.real()) < 1e-9);
    CHECK(1.0 / c.asym().g_inf.real() == doctest::Approx(1.4944e4).epsilon(1e-3));
    CHECK_THROWS_AS(c.big_gamma(c.horizon() * 1.5), ValidationError);
}

TEST_CASE("warnings") {
    const auto shaky = SpectralModel::lorentzian(0.01, 0.3, 0.5);
    const auto c = build_coefficients(shaky);
    REQUIRE(!c.warnings().empty());
    CHECK(c.warnings()[0].find("extension") != std::string::npos);
    CHECK(build_coefficients(fig2).warnings().empty());
}

TEST_CASE("tabulated model tracks its continuous counterpart") {
    // tabulate the Ohmic density densely and compare coefficients/asymptotics
    const auto cont = SpectralModel::ohmic(0.01, 1.0);
    std::vector<std::pair<double, double>> samples;
    for (int i = 0; i <= 12000; ++i) {
        const double w = 150.0 * i / 12000;
        samples.emplace_back(w, eval_spectral_density(cont, w));
    }
    const auto tab = SpectralModel::tabulated(std::move(samples), 1.0);
    const auto at = asymptotics(tab);
    const auto ac = asymptotics(cont);
    CHECK(rel(at.f_minus_inf, ac.f_minus_inf) < 1e-6);
    // PV quadrature vs closed form; the finite tabulation domain costs ~1/60²
    CHECK(std::abs(at.g_inf.imag() - ac.g_inf.imag()) < 2e-4 * ac.g_inf.real());

    const auto ct = build_coefficients(tab);
    const auto cc = build_coefficients(cont);
    for (double t : {0.8, 5.0, 20.0}) {
        CHECK(std::abs(ct.f_minus(t) - cc.f_minus(t)) < 2e-4 * ac.f_minus_inf);
        CHECK(std::abs(ct.g_i(t) - cc.g_i(t)) < 2e-4 * ac.f_minus_inf);
    }
}

TEST_CASE("csv export format") {
    const auto c = build_coefficients(SpectralModel::ohmic(0.01, 1.0));
    std::ostringstream os;
    c.export_csv(os, 1.0, 4);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    CHECK(header == "t,f_plus,f_minus,g_re,g_im,h,Gamma_re,Gamma_im");
    std::string first;
    std::getline(is, first);
    CHECK(first.rfind("0,0,0,0,0,", 0) == 0);
}
