#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracle_helpers.hpp"
#include "spde/energy.hpp"
#include "spde/fokker_planck.hpp"
#include "spde/porous_media.hpp"
#include "spde/rng.hpp"
#include "spde/spectral.hpp"

using namespace spde;

namespace {

NoiseModel noise_off(const GridPtr& g) {
    return build_noise_basis(NoiseFamilySpec{}, 0, g);
}

NoiseModel trig_noise(const GridPtr& g, int n, double c = 0.5) {
    NoiseFamilySpec f;
    f.kind = NoiseFamilyKind::trig;
    f.c = c;
    f.p = 2.0;
    f.window_fraction = 0.8;
    return build_noise_basis(f, n, g);
}

NoiseModel unit_mode(const GridPtr& g) {
    NoiseFamilySpec f;
    f.kind = NoiseFamilyKind::tabulated;
    f.tabulated_modes = {std::vector<double>(static_cast<size_t>(g->n_points()), 1.0)};
    return build_noise_basis(f, 1, g);
}

Trajectory constant_trajectory(const GridPtr& g, const RealField& z, int n_snap,
                               double dt) {
    Trajectory traj(g, dt, 1, n_snap - 1);
    for (int j = 0; j < n_snap; ++j) traj.record(z);
    return traj;
}

}  // namespace

TEST_CASE("energy path closed forms") {
    const GridPtr g = make_grid(M_PI, 128);
    const double L = g->half_length();
    const RealField z1 = sample_field(g, [](double x) { return std::exp(-x * x); });

    SUBCASE("identical trajectories have zero energy") {
        const Trajectory t = constant_trajectory(g, z1, 5, 0.1);
        for (double v : energy_path(t, t)) CHECK(v == 0.0);
    }
    SUBCASE("constant difference c has energy c^2 2L") {
        const RealField z2 = sample_field(g, [&](double x) {
            return std::exp(-x * x) + 0.75;
        });
        const Trajectory t1 = constant_trajectory(g, z1, 3, 0.1);
        const Trajectory t2 = constant_trajectory(g, z2, 3, 0.1);
        for (double v : energy_path(t1, t2))
            CHECK(v == doctest::Approx(0.75 * 0.75 * 2.0 * L).epsilon(1e-12));
    }
    SUBCASE("cosine perturbation has the eigenfunction energy") {
        const double delta = 1e-2;
        const double k = M_PI / L;
        RealField z2 = z1;
        axpy(delta, sample_field(g, [&](double x) { return std::cos(k * x); }), z2);
        const Trajectory t1 = constant_trajectory(g, z1, 2, 0.1);
        const Trajectory t2 = constant_trajectory(g, z2, 2, 0.1);
        const double expected = delta * delta * L / (1.0 + k * k);
        CHECK(energy_path(t1, t2)[0] == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("schedule mismatch throws") {
        const Trajectory t1 = constant_trajectory(g, z1, 3, 0.1);
        const Trajectory t2 = constant_trajectory(g, z1, 4, 0.1);
        CHECK_THROWS_AS(energy_path(t1, t2), std::invalid_argument);
    }
}

TEST_CASE("gronwall constants by direct substitution") {
    const GridPtr g = make_grid(M_PI, 64);

    SUBCASE("noise off: C equals the diffusion bound") {
        CHECK(gronwall_constant_fp(noise_off(g), DiffusionCoefficient::constant(1.0)) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("single unit mode has C(e) = sqrt(2), so C = 3 with a = 1") {
        CHECK(gronwall_constant_fp(unit_mode(g), DiffusionCoefficient::constant(1.0)) ==
              doctest::Approx(3.0).epsilon(1e-12));
    }
    SUBCASE("drift-only model: C = 2 sqrt(2)") {
        NoiseFamilySpec f;
        f.has_drift = true;
        f.drift_constant = 1.0;
        const NoiseModel model = build_noise_basis(f, 0, g);
        CHECK(gronwall_constant_fp(model, DiffusionCoefficient::constant(0.0)) ==
              doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-12));
    }
    SUBCASE("porous-media constants") {
        CHECK(gronwall_constant_pme(noise_off(g), Nonlinearity::identity()) ==
              doctest::Approx(1.0).epsilon(1e-12));
        CHECK(gronwall_constant_pme(unit_mode(g), Nonlinearity::identity()) ==
              doctest::Approx(3.0).epsilon(1e-12));
        const Nonlinearity lip2{[](double x) { return 2.0 * x; }, 2.0, "2x"};
        CHECK(gronwall_constant_pme(noise_off(g), lip2) ==
              doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("martingale reconstruction") {
    const GridPtr g = make_grid(M_PI, 64);
    const RealField z = sample_field(g, [](double x) { return std::exp(-x * x); });

    SUBCASE("zero difference or zero modes give the zero path") {
        const Trajectory t = constant_trajectory(g, z, 6, 0.01);
        const auto incs = BrownianIncrements::sample(0, 5, 0.01, 1);
        for (double v : martingale_path(t, t, noise_off(g), incs)) CHECK(v == 0.0);
        for (double v : martingale_path(t, t, unit_mode(g),
                                        BrownianIncrements::sample(1, 5, 0.01, 1)))
            CHECK(v == 0.0);
    }
    SUBCASE("frozen difference: ensemble mean of M(T) vanishes (3 SE)") {
        const NoiseModel noise = trig_noise(g, 3);
        const Trajectory t1 = constant_trajectory(g, z, 11, 0.01);
        const Trajectory t2 = constant_trajectory(g, RealField(g), 11, 0.01);
        const int n_seeds = 1000;
        double sum = 0.0, sum2 = 0.0;
        for (int s = 0; s < n_seeds; ++s) {
            const auto incs = BrownianIncrements::sample(
                3, 10, 0.01, derive_seed(55, static_cast<std::uint64_t>(s)));
            const double m = martingale_path(t1, t2, noise, incs).back();
            sum += m;
            sum2 += m * m;
        }
        const double mean = sum / n_seeds;
        const double se =
            std::sqrt((sum2 - n_seeds * mean * mean) / (n_seeds - 1) / n_seeds);
        CHECK(std::abs(mean) < 3.0 * se);
    }
}

TEST_CASE("localization times") {
    const GridPtr g = make_grid(M_PI, 64);
    const RealField z = sample_field(g, [](double x) { return std::exp(-x * x); });
    const Trajectory t1 = constant_trajectory(g, z, 11, 0.1);
    const Trajectory t0 = constant_trajectory(g, RealField(g), 11, 0.1);

    SUBCASE("zero difference never triggers positive levels") {
        for (double tau : localization_times(t0, t0, {0.5, 1.0, 2.0}))
            CHECK(std::isinf(tau));
    }
    SUBCASE("huge levels never trigger") {
        for (double tau : localization_times(t1, t0, {1e12}))
            CHECK(std::isinf(tau));
    }
    SUBCASE("level zero triggers immediately when z(0) is nonzero") {
        const auto taus = localization_times(t1, t0, {0.0});
        CHECK(taus[0] == 0.0);
    }
    SUBCASE("times are nondecreasing in the level") {
        // constant z: the L2 time integral grows linearly, so levels above
        // the static H^-2 norm map to increasing first-hit times
        const double rate = std::pow(l2_norm(z), 2);
        const double hm2 = std::pow(sobolev_norm(z, -2.0), 2);
        const Trajectory t_long = constant_trajectory(g, z, 31, 0.1);
        const Trajectory t_zero = constant_trajectory(g, RealField(g), 31, 0.1);
        const auto taus = localization_times(
            t_long, t_zero,
            {hm2 + 0.2 * rate, hm2 + 0.45 * rate, hm2 + 0.8 * rate});
        CHECK(taus[0] <= taus[1]);
        CHECK(taus[1] <= taus[2]);
        CHECK(taus[0] > 0.0);
        CHECK(std::isfinite(taus[2]));
    }
    SUBCASE("levels must increase") {
        CHECK_THROWS_AS(localization_times(t1, t0, {1.0, 0.5}),
                        std::invalid_argument);
    }
    SUBCASE("integral at the hit overshoots the level by at most one window") {
        const double rate = std::pow(l2_norm(z), 2);
        const double hm2 = std::pow(sobolev_norm(z, -2.0), 2);
        const double level = hm2 + 0.3 * rate;
        const auto taus = localization_times(t1, t0, {level});
        REQUIRE(std::isfinite(taus[0]));
        // integral value at the hit snapshot (constant z: rate * t)
        const double integral_at_hit = rate * taus[0];
        CHECK(integral_at_hit <= level + rate * 0.1 + 1e-12);
    }
}

TEST_CASE("mollified energy ladder on a live pair") {
    const GridPtr g = make_grid(M_PI, 256);
    const NoiseModel noise = trig_noise(g, 3);
    const double dt = 1e-4;
    const int n_steps = 400;
    const auto incs = BrownianIncrements::sample(3, n_steps, dt, 12);
    const DiffusionCoefficient a = DiffusionCoefficient::constant(0.5);
    const RealField x0 = sample_field(g, [](double x) { return std::exp(-x * x); });
    RealField x0p = x0;
    axpy(1e-2, sample_field(g, [](double x) { return std::cos(x); }), x0p);
    const SolveOptions opts{Scheme::explicit_em, false, 20};
    const Trajectory t1 = solve_fp(x0, a, noise, incs, n_steps, dt, opts);
    const Trajectory t2 = solve_fp(x0p, a, noise, incs, n_steps, dt, opts);

    const DriftDifferenceFn drift = [&](int snap, const RealField& f1,
                                        const RealField& f2) {
        const IncrementsPrefix history(incs, snap * 20);
        return pointwise_product(a.at(snap * 20, g, history), f1 - f2);
    };

    SUBCASE("identical pair: everything vanishes") {
        const auto ladder =
            mollified_energy_path(t1, t1, noise, {0.4, 0.2}, drift);
        for (const auto& entry : ladder) {
            CHECK(entry.field_discrepancy == 0.0);
            CHECK(entry.mode_discrepancy == 0.0);
            CHECK(entry.max_energy_gap == 0.0);
        }
    }
    SUBCASE("discrepancies decrease along the ladder; gap is O(eps^2)") {
        const std::vector<double> eps{0.4, 0.2, 0.1, 0.05};
        const auto ladder = mollified_energy_path(t1, t2, noise, eps, drift);
        REQUIRE(ladder.size() == 4);
        for (size_t i = 1; i < ladder.size(); ++i) {
            CHECK(ladder[i].field_discrepancy <=
                  ladder[i - 1].field_discrepancy * 1.05);
            CHECK(ladder[i].drift_discrepancy <=
                  ladder[i - 1].drift_discrepancy * 1.05);
            CHECK(ladder[i].mode_discrepancy <=
                  ladder[i - 1].mode_discrepancy * 1.05);
            CHECK(ladder[i].pairing_discrepancy <=
                  ladder[i - 1].pairing_discrepancy * 1.05);
        }
        // band-limited-ish difference: the energy gap closes quadratically
        const double slope =
            std::log(ladder[1].max_energy_gap / ladder[3].max_energy_gap) /
            std::log(eps[1] / eps[3]);
        CHECK(slope > 1.5);
        // g_eps converges to g from below up to discretization noise
        for (const auto& entry : ladder)
            for (size_t j = 0; j < entry.g_eps.size(); ++j)
                CHECK(entry.g_eps[j] <= energy_path(t1, t2)[j] * (1.0 + 1e-10));
    }
    SUBCASE("single rung gives a family of size one") {
        const auto ladder = mollified_energy_path(t1, t2, noise, {0.3}, drift);
        CHECK(ladder.size() == 1);
    }
    SUBCASE("increasing ladder is rejected") {
        CHECK_THROWS_AS(mollified_energy_path(t1, t2, noise, {0.1, 0.2}, drift),
                        std::invalid_argument);
    }
}

TEST_CASE("gronwall check on a dissipative pair") {
    const GridPtr g = make_grid(M_PI, 128);
    const NoiseModel noise = noise_off(g);
    const DiffusionCoefficient a = DiffusionCoefficient::constant(0.5);
    const double dt = 2e-4;
    const int n_steps = 1000;
    const auto incs = BrownianIncrements::sample(0, n_steps, dt, 1);
    const RealField x0 = sample_field(g, [](double x) { return std::exp(-x * x); });
    RealField x0p = x0;
    axpy(1e-2, sample_field(g, [](double x) { return std::cos(x); }), x0p);
    const Trajectory t1 = solve_fp(x0, a, noise, incs, n_steps, dt);
    const Trajectory t2 = solve_fp(x0p, a, noise, incs, n_steps, dt);

    LedgerOptions opts;
    opts.gronwall_constant = gronwall_constant_fp(noise, a);
    const DriftDifferenceFn drift = [&](int snap, const RealField& f1,
                                        const RealField& f2) {
        const IncrementsPrefix history(incs, snap);
        return pointwise_product(a.at(snap, g, history), f1 - f2);
    };
    const EnergyLedger ledger = build_energy_ledger(t1, t2, noise, incs, drift, opts);

    SUBCASE("heat pair: no martingale, decreasing energy, verdict passes") {
        for (double v : ledger.martingale) CHECK(v == 0.0);
        CHECK(ledger.g.front() > ledger.g.back());
        CHECK(ledger.min_dissipation_increment >= -1e-10);
        const GronwallVerdict verdict = gronwall_check(ledger);
        CHECK(verdict.pathwise_pass);
        CHECK(verdict.margin > 0.0);
        CHECK(verdict.margin_at_2C > 0.0);
    }
    SUBCASE("identical pair: all ledger quantities vanish and the check passes") {
        const EnergyLedger zero_ledger =
            build_energy_ledger(t1, t1, noise, incs, drift, opts);
        for (double v : zero_ledger.g) CHECK(v == 0.0);
        for (double v : zero_ledger.dissipation) CHECK(v == 0.0);
        CHECK(gronwall_check(zero_ledger).pathwise_pass);
    }
}

TEST_CASE("stochastic pair ledger closes the energy identity") {
    const GridPtr g = make_grid(M_PI, 128);
    const NoiseModel noise = trig_noise(g, 4);
    const DiffusionCoefficient a = DiffusionCoefficient::constant(0.5);
    const double dt = 5e-4;
    const int n_steps = 2000;
    const auto incs = BrownianIncrements::sample(4, n_steps, dt, 99);
    const RealField x0 = sample_field(g, [](double x) { return std::exp(-x * x); });
    RealField x0p = x0;
    axpy(1e-2, sample_field(g, [](double x) { return std::cos(x); }), x0p);
    const Trajectory t1 = solve_fp(x0, a, noise, incs, n_steps, dt);
    const Trajectory t2 = solve_fp(x0p, a, noise, incs, n_steps, dt);

    LedgerOptions opts;
    opts.gronwall_constant = gronwall_constant_fp(noise, a);
    const DriftDifferenceFn drift = [&](int snap, const RealField& f1,
                                        const RealField& f2) {
        const IncrementsPrefix history(incs, snap);
        return pointwise_product(a.at(snap, g, history), f1 - f2);
    };
    const EnergyLedger ledger = build_energy_ledger(t1, t2, noise, incs, drift, opts);

    CHECK(ledger.g.front() > 0.0);
    for (double v : ledger.g) CHECK(v >= 0.0);
    CHECK(ledger.min_dissipation_increment >= -1e-10);
    CHECK(std::isfinite(ledger.martingale_quadratic_sum));
    CHECK(ledger.martingale_quadratic_sum > 0.0);

    const GronwallVerdict verdict = gronwall_check(ledger);
    CHECK(verdict.pathwise_pass);
    CHECK(verdict.margin_at_2C > 0.0);
}

TEST_CASE("porous-media ledger witnesses the alpha bound chain") {
    const GridPtr g = make_grid(M_PI, 128);
    const NoiseModel noise = trig_noise(g, 3);
    const Nonlinearity psi = Nonlinearity::arctan();
    const double dt = 5e-4;
    const int n_steps = 1000;
    const auto incs = BrownianIncrements::sample(3, n_steps, dt, 7);
    const RealField x0 = sample_field(g, [](double x) { return std::exp(-x * x); });
    RealField x0p = x0;
    axpy(1e-2, sample_field(g, [](double x) { return std::cos(x); }), x0p);
    const Trajectory t1 = solve_pme(x0, psi, noise, incs, n_steps, dt);
    const Trajectory t2 = solve_pme(x0p, psi, noise, incs, n_steps, dt);

    LedgerOptions opts;
    opts.gronwall_constant = gronwall_constant_pme(noise, psi);
    opts.inv_alpha = psi.inv_alpha();
    const DriftDifferenceFn drift = [&](int, const RealField& f1,
                                        const RealField& f2) {
        return psi.apply(f1) - psi.apply(f2);
    };
    const EnergyLedger ledger = build_energy_ledger(t1, t2, noise, incs, drift, opts);
    REQUIRE(ledger.bound_chain_violation.has_value());
    CHECK(*ledger.bound_chain_violation <= 1e-12);
    CHECK(ledger.min_dissipation_increment >= -1e-10);
    CHECK(gronwall_check(ledger).pathwise_pass);
}

TEST_CASE("ensemble envelope bookkeeping") {
    const std::vector<double> times{0.0, 0.5, 1.0};
    SUBCASE("flat paths pass inside the envelope") {
        const std::vector<std::vector<double>> paths(
            20, std::vector<double>{1.0, 1.0, 1.0});
        const EnsembleEnvelope env = ensemble_envelope(paths, times, 1.0, 0.05);
        CHECK(env.pass);
        CHECK(env.mean_g[2] == doctest::Approx(1.0));
        CHECK(env.standard_error[2] == 0.0);
    }
    SUBCASE("super-exponential growth fails") {
        std::vector<std::vector<double>> paths(
            20, std::vector<double>{1.0, 10.0, 100.0});
        const EnsembleEnvelope env = ensemble_envelope(paths, times, 1.0, 0.05);
        CHECK_FALSE(env.pass);
        CHECK(env.max_excess > 0.0);
    }
}
