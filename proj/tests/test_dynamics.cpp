#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sbnm/dynamics.hpp"
#include "sbnm/errors.hpp"
#include "sbnm/measure.hpp"

using namespace sbnm;
using namespace sbnm::dynamics;
using spectral::SpectralModel;

namespace {
constexpr double kPi = std::numbers::pi;
const SpectralModel fig2 = SpectralModel::lorentzian(0.01, 0.1, -0.9);

EvolutionConfig cfg_at(double tmax, Engine e = Engine::FullClosed) {
    EvolutionConfig c;
    c.engine = e;
    c.t_max = tmax;
    return c;
}
} // namespace

TEST_CASE("qubit state basics") {
    const auto s = QubitState::from_bloch(0.3, -0.4, 0.5);
    CHECK(s.rho11() == doctest::Approx(0.75));
    CHECK(s.rho10() == std::complex<double>(0.15, 0.2));
    CHECK(s.rho01() == std::conj(s.rho10()));
    CHECK(s.rho11() + s.rho00() == doctest::Approx(1.0));
    CHECK_THROWS_AS(QubitState::from_bloch(1.0, 0.5, 0.0), ValidationError);
    const auto eq = QubitState::equatorial(kPi / 3);
    CHECK(eq.lx == doctest::Approx(std::cos(kPi / 6)));
    CHECK(eq.lz == 0.0);
    CHECK(QubitState::from_density(0.75, {0.15, -0.2}).ly == doctest::Approx(0.4));
}

TEST_CASE("near-zero coupling freezes the state") {
    const auto c = spectral::build_coefficients(SpectralModel::lorentzian(1e-12, 0.1, -0.9));
    const auto rho0 = QubitState::from_bloch(0.2, 0.3, -0.4);
    for (Engine e : {Engine::FullBloch, Engine::FullClosed, Engine::RWA, Engine::SA}) {
        const auto traj = evolve(c, rho0, cfg_at(200.0, e));
        const auto& last = traj.back().state;
        CHECK(measure::trace_distance(last, rho0) < 1e-9);
    }
}

TEST_CASE("map state structure") {
    const auto c = spectral::build_coefficients(fig2);
    auto cfg = cfg_at(400.0);
    cfg.output_times = {0.0, 1.0, 10.0, 100.0, 400.0};
    const auto map = evolve_map(c, cfg);
    REQUIRE(map.size() == 5);
    CHECK(map[0].Gamma == std::complex<double>(0, 0));
    CHECK(map[0].u == 0.0);
    CHECK(map[0].v1 == std::complex<double>(1, 0));
    CHECK(map[0].v2 == std::complex<double>(0, 0));
    // |v1|² − |v2|² is conserved by the conjugate-coupled structure of the v-ODE
    for (const auto& ms : map)
        CHECK(std::abs(std::norm(ms.v1) - std::norm(ms.v2) - 1.0) < 1e-8);
    // u relaxes toward (f+∞ − f−∞)/(2 g_r∞)
    const double uinf = (c.asym().f_plus_inf - c.asym().f_minus_inf) / (2 * c.asym().g_inf.real());
    const double expect = uinf * (1 - std::exp(-c.big_gamma(400.0).real()));
    CHECK(map.back().u == doctest::Approx(expect).epsilon(5e-3));
}

TEST_CASE("t = 0 returns the initial state unchanged") {
    const auto c = spectral::build_coefficients(fig2);
    const auto rho0 = QubitState::from_bloch(0.1, -0.6, 0.5);
    auto cfg = cfg_at(1.0);
    cfg.output_times = {0.0, 1.0};
    const auto ev = evolve_full_closed(c, rho0, cfg);
    CHECK(measure::trace_distance(ev.states[0].state, rho0) == 0.0);
}

TEST_CASE("engine equivalence: Bloch ODE vs closed-form map") {
    const auto c = spectral::build_coefficients(fig2);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u01(0, 1);
    double worst = 0;
    for (int k = 0; k < 12; ++k) {
        double x = 2 * u01(rng) - 1, y = 2 * u01(rng) - 1, z = 2 * u01(rng) - 1;
        const double n = std::sqrt(x * x + y * y + z * z);
        const double r = u01(rng) / std::max(n, 1e-12);
        const auto rho0 = QubitState::from_bloch(x * r, y * r, z * r);
        const double tend = 5.0 + 495.0 * u01(rng);
        auto cfg = cfg_at(tend);
        cfg.output_times = {tend / 3, tend};
        const auto tb = evolve_full_bloch(c, rho0, cfg);
        const auto tc = evolve_full_closed(c, rho0, cfg).states;
        for (std::size_t i = 0; i < tb.size(); ++i)
            worst = std::max(worst, measure::trace_distance(tb[i].state, tc[i].state));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("trace preservation and positivity along trajectories") {
    const auto c = spectral::build_coefficients(fig2);
    const auto rho0 = QubitState::from_bloch(0.4, 0.2, 0.8);
    auto cfg = cfg_at(2000.0);
    cfg.output_times = {0.5, 5, 50, 500, 2000};
    for (Engine e : {Engine::FullBloch, Engine::FullClosed, Engine::RWA, Engine::SA}) {
        cfg.engine = e;
        for (const auto& p : evolve(c, rho0, cfg)) {
            CHECK(p.state.rho11() + p.state.rho00() == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(p.state.norm() <= 1.0 + 1e-9);  // min eigenvalue ≥ −5e−10
        }
    }
}

TEST_CASE("excited-state relaxation follows the closed form") {
    const auto c = spectral::build_coefficients(fig2);
    auto cfg = cfg_at(3000.0, Engine::FullBloch);
    cfg.output_times = {1500.0, 3000.0};
    const auto traj = evolve_full_bloch(c, QubitState::excited(), cfg);
    for (const auto& p : traj) {
        const auto ms = evolve_map(c, [&] {
            auto c2 = cfg_at(p.t);
            c2.output_times = {p.t};
            return c2;
        }()).back();
        CHECK(p.state.lz == doctest::Approx(ms.u + std::exp(-ms.Gamma.real())).epsilon(1e-7));
    }
}

TEST_CASE("equatorial antipodal pair decays on tau_r") {
    const auto c = spectral::build_coefficients(fig2);
    const double taur = 1.0 / c.asym().g_inf.real();
    auto cfg = cfg_at(3000.0);
    cfg.output_times = {500.0, 1500.0, 3000.0};
    const auto a = evolve_full_closed(c, QubitState::equatorial(0.3), cfg).states;
    const auto b = evolve_full_closed(c, QubitState{-QubitState::equatorial(0.3).lx,
                                                    -QubitState::equatorial(0.3).ly, 0.0},
                                      cfg).states;
    for (const auto& dp : pair_difference(a, b))
        CHECK(dp.norm() == doctest::Approx(2 * std::exp(-dp.t / taur)).epsilon(2e-3));
}

TEST_CASE("RWA engine") {
    const auto c = spectral::build_coefficients(fig2);
    auto cfg = cfg_at(800.0, Engine::RWA);
    cfg.output_times = {0.0, 5.0, 80.0, 800.0};

    // ground state is stationary
    for (const auto& p : evolve_rwa(c, QubitState::ground(), cfg))
        CHECK(measure::trace_distance(p.state, QubitState::ground()) < 1e-14);

    // population relaxation: λz = −1 + 2 e^{−Γ^RWA}
    for (const auto& p : evolve_rwa(c, QubitState::excited(), cfg))
        CHECK(p.state.lz == doctest::Approx(-1 + 2 * std::exp(-c.gamma_rwa(p.t))).epsilon(1e-12));

    // pole pair trace distance = e^{−Γ^RWA}
    const auto t1 = evolve_rwa(c, QubitState::excited(), cfg);
    const auto t2 = evolve_rwa(c, QubitState::ground(), cfg);
    for (std::size_t i = 0; i < t1.size(); ++i)
        CHECK(measure::trace_distance(t1[i].state, t2[i].state) ==
              doctest::Approx(std::exp(-c.gamma_rwa(t1[i].t))).epsilon(1e-12));
}

TEST_CASE("SA engine") {
    const auto c = spectral::build_coefficients(fig2);
    auto cfg = cfg_at(900.0, Engine::SA);
    cfg.output_times = {0.0, 3.0, 90.0, 900.0};

    // coherence magnitude e^{−Γr/2}
    const auto rho0 = QubitState::from_bloch(0.6, -0.3, 0.2);
    for (const auto& p : evolve_sa(c, rho0, cfg)) {
        const double expect = std::exp(-0.5 * c.big_gamma(p.t).real()) * std::abs(rho0.rho10());
        CHECK(std::abs(p.state.rho10()) == doctest::Approx(expect).epsilon(1e-10));
    }

    // antipodal λz difference decays as e^{−Γr}
    const auto a = evolve_sa(c, QubitState::from_bloch(0.1, 0.2, 0.9), cfg);
    const auto b = evolve_sa(c, QubitState::from_bloch(-0.1, -0.2, -0.9), cfg);
    for (const auto& dp : pair_difference(a, b))
        CHECK(dp.dl[2] == doctest::Approx(1.8 * std::exp(-c.big_gamma(dp.t).real())).epsilon(1e-10));

    // maximally mixed state is stationary when f+ = f− (Δ = ω_A makes them equal)
    const auto sym = spectral::build_coefficients(SpectralModel::lorentzian(0.01, 0.1, 1.0));
    auto scfg = cfg_at(50.0, Engine::SA);
    scfg.output_times = {50.0};
    const auto still = evolve_sa(sym, QubitState::from_bloch(0, 0, 0), scfg);
    CHECK(still.back().state.norm() < 1e-12);
}

TEST_CASE("pair_difference basics") {
    const auto c = spectral::build_coefficients(fig2);
    auto cfg = cfg_at(10.0);
    cfg.output_times = {0.0, 10.0};
    const auto a = evolve_full_closed(c, QubitState::excited(), cfg).states;
    CHECK(pair_difference(a, a)[0].norm() == 0.0);
    CHECK(pair_difference(a, a)[1].norm() == 0.0);
    const auto b = evolve_full_closed(c, QubitState::ground(), cfg).states;
    CHECK(pair_difference(a, b)[0].norm() == doctest::Approx(2.0));
    auto cfg2 = cfg_at(10.0);
    cfg2.output_times = {0.0, 5.0};
    const auto d = evolve_full_closed(c, QubitState::ground(), cfg2).states;
    CHECK_THROWS_AS(pair_difference(a, d), ValidationError);
}

TEST_CASE("config validation") {
    const auto c = spectral::build_coefficients(fig2);
    auto cfg = cfg_at(-1.0);
    CHECK_THROWS_AS(cfg.validate(c), ValidationError);
    cfg.t_max = c.horizon() * 10;  // beyond the coefficient grid
    CHECK_THROWS_AS(cfg.validate(c), ValidationError);
    cfg.t_max = 10;
    cfg.output_times = {20.0};
    CHECK_THROWS_AS(cfg.validate(c), ValidationError);
    cfg.output_times.clear();
    cfg.max_step = 1.0;  // above min(tau_s, tau_c)/40
    CHECK_THROWS_AS(cfg.validate(c), ValidationError);
}

TEST_CASE("sigma oscillates at 2 omega_a for the full engine") {
    const auto c = spectral::build_coefficients(fig2);
    const double h = kPi / 40;
    auto cfg = cfg_at(400.0);
    cfg.output_times.clear();
    for (double t = 100.0; t <= 400.0; t += h) cfg.output_times.push_back(t);
    const auto a = evolve_full_closed(c, QubitState::equatorial(kPi), cfg).states;
    const auto b = evolve_full_closed(c, QubitState{-QubitState::equatorial(kPi).lx,
                                                    -QubitState::equatorial(kPi).ly, 0.0},
                                      cfg).states;
    const auto st = measure::sigma_series(a, b, &c, Engine::FullClosed);
    // discrete Fourier amplitude of dD/dt at candidate frequencies
    auto amp = [&](double w) {
        std::complex<double> acc{0, 0};
        for (std::size_t i = 0; i < st.t.size(); ++i)
            acc += st.sigma[i] * std::exp(std::complex<double>(0, -w * st.t[i]));
        return std::abs(acc);
    };
    const double a2 = amp(2.0);
    CHECK(a2 > 5.0 * amp(1.0));
    CHECK(a2 > 5.0 * amp(3.0));
    CHECK(a2 > 5.0 * amp(0.5));
}
