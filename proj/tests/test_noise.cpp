#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "oracle_helpers.hpp"
#include "spde/errors.hpp"
#include "spde/noise.hpp"
#include "spde/rng.hpp"
#include "spde/spectral.hpp"
#include "spde/trajectory.hpp"

using namespace spde;

namespace {

NoiseFamilySpec trig_family(double c, double p, double window = 0.0) {
    NoiseFamilySpec f;
    f.kind = NoiseFamilyKind::trig;
    f.c = c;
    f.p = p;
    f.window_fraction = window;
    return f;
}

NoiseModel constant_mode_model(const GridPtr& grid, double value) {
    NoiseFamilySpec f;
    f.kind = NoiseFamilyKind::tabulated;
    f.tabulated_modes = {std::vector<double>(static_cast<size_t>(grid->n_points()), value)};
    return build_noise_basis(f, 1, grid);
}

}  // namespace

TEST_CASE("trig family sup norms and summability bookkeeping") {
    const GridPtr g = make_grid(M_PI, 256);
    const NoiseModel model = build_noise_basis(trig_family(1.0, 2.0), 4, g);

    // w == 1: sup |e^i| is hit exactly at xi = 0, so equals c/i^2.
    REQUIRE(model.n_modes() == 4);
    for (int i = 1; i <= 4; ++i)
        CHECK(model.mode_sup[static_cast<size_t>(i - 1)] ==
              doctest::Approx(1.0 / (i * i)).epsilon(1e-12));

    // stored partial sum equals the recomputed one
    double partial = 0.0;
    for (int i = 0; i < 4; ++i)
        partial += model.mode_sup[static_cast<size_t>(i)] * model.mode_sup[static_cast<size_t>(i)] +
                   model.mode_deriv_sup[static_cast<size_t>(i)] *
                       model.mode_deriv_sup[static_cast<size_t>(i)];
    CHECK(model.summability_partial == doctest::Approx(partial).epsilon(1e-12));

    // multiplier bounds match their defining formula
    for (int i = 0; i < 4; ++i) {
        const double expected =
            std::sqrt(2.0) * std::sqrt(model.mode_sup[static_cast<size_t>(i)] *
                                           model.mode_sup[static_cast<size_t>(i)] +
                                       model.mode_deriv_sup[static_cast<size_t>(i)] *
                                           model.mode_deriv_sup[static_cast<size_t>(i)]);
        CHECK(model.multiplier_bounds[static_cast<size_t>(i)] ==
              doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("partial sums are monotone in N and match the closed form") {
    const GridPtr g = make_grid(M_PI, 1024);
    const double L = g->half_length();
    double previous = 0.0;
    for (int n : {4, 8, 16, 32, 64}) {
        const NoiseModel model = build_noise_basis(trig_family(1.0, 2.0), n, g);
        CHECK(model.summability_partial >= previous);
        previous = model.summability_partial;
        if (n >= 32) {
            double analytic = 0.0;
            for (int i = 1; i <= n; ++i) {
                const double ci = 1.0 / (i * i);
                analytic += ci * ci * (1.0 + std::pow(i * M_PI / L, 2));
            }
            CHECK(model.summability_partial ==
                  doctest::Approx(analytic).epsilon(0.01));
        }
    }
}

TEST_CASE("divergent families are rejected") {
    const GridPtr g = make_grid(M_PI, 128);
    CHECK_THROWS_AS(build_noise_basis(trig_family(1.0, 1.0), 4, g),
                    AssumptionViolation);
    NoiseFamilySpec gauss;
    gauss.kind = NoiseFamilyKind::gaussian;
    gauss.p = 0.4;
    CHECK_THROWS_AS(build_noise_basis(gauss, 4, g), AssumptionViolation);
}

TEST_CASE("N = 0 turns the noise off") {
    const GridPtr g = make_grid(M_PI, 64);
    const NoiseModel model = build_noise_basis(NoiseFamilySpec{}, 0, g);
    CHECK(model.n_modes() == 0);
    const BrownianIncrements incs = BrownianIncrements::sample(0, 8, 0.1, 1);
    const RealField z = sample_field(g, [](double) { return 2.0; });
    const RealField dz = noise_increment(z, model, incs, 0);
    for (int j = 0; j < dz.size(); ++j) CHECK(dz[j] == 0.0);
}

TEST_CASE("multiplier norm bound formula") {
    const GridPtr g = make_grid(M_PI, 256);
    SUBCASE("constant one gives sqrt(2)") {
        const RealField e = sample_field(g, [](double) { return 1.0; });
        CHECK(multiplier_norm_bound(e, RealField(g)) ==
              doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    }
    SUBCASE("zero gives zero") {
        CHECK(multiplier_norm_bound(RealField(g), RealField(g)) == 0.0);
    }
    SUBCASE("sin with unit sups gives 2") {
        const RealField e = sample_field(g, [](double x) { return std::sin(x); });
        const RealField ep = sample_field(g, [](double x) { return std::cos(x); });
        CHECK(multiplier_norm_bound(e, ep) == doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("empirical multiplier norm stays below the analytic bound") {
    const GridPtr g = make_grid(M_PI, 512);
    const std::vector<RealField> probes = make_probes(g, 100, 99);

    SUBCASE("identity multiplier is exactly one") {
        const RealField e = sample_field(g, [](double) { return 1.0; });
        CHECK(multiplier_norm_empirical(e, probes) ==
              doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("zero multiplier is zero") {
        CHECK(multiplier_norm_empirical(RealField(g), probes) == 0.0);
    }
    SUBCASE("sin multiplier: lower bound below 2, frozen regression value") {
        const RealField e = sample_field(g, [](double x) { return std::sin(x); });
        const double achieved = multiplier_norm_empirical(e, probes);
        CHECK(achieved <= 2.0 * (1.0 + 1e-8));
        // regression value recorded from this probe generator and seed
        CHECK(achieved == doctest::Approx(0.955279).epsilon(0.02));
    }
    SUBCASE("every built-in family member obeys the bound") {
        const NoiseModel trig = build_noise_basis(trig_family(1.0, 2.0, 0.8), 6, g);
        for (int i = 0; i < trig.n_modes(); ++i)
            CHECK(multiplier_norm_empirical(trig.modes[static_cast<size_t>(i)], probes) <=
                  trig.multiplier_bounds[static_cast<size_t>(i)] * (1.0 + 1e-8));
        NoiseFamilySpec gspec;
        gspec.kind = NoiseFamilyKind::gaussian;
        gspec.c = 1.0;
        gspec.p = 1.0;
        gspec.width = 0.5;
        const NoiseModel gauss = build_noise_basis(gspec, 6, g);
        for (int i = 0; i < gauss.n_modes(); ++i)
            CHECK(multiplier_norm_empirical(gauss.modes[static_cast<size_t>(i)], probes) <=
                  gauss.multiplier_bounds[static_cast<size_t>(i)] * (1.0 + 1e-8));
    }
}

TEST_CASE("Brownian increments: determinism, statistics, stability under N") {
    SUBCASE("same seed is bit-identical") {
        const auto a = BrownianIncrements::sample(4, 100, 0.01, 42);
        const auto b = BrownianIncrements::sample(4, 100, 0.01, 42);
        CHECK(a.rows() == b.rows());
    }
    SUBCASE("row variance within 5 standard errors") {
        const int n = 100000;
        const double dt = 2e-3;
        const auto incs = BrownianIncrements::sample(3, n, dt, 7);
        for (int mode = 1; mode <= 3; ++mode) {
            double mean = 0.0;
            for (int s = 0; s < n; ++s) mean += incs.increment(mode, s);
            mean /= n;
            double var = 0.0;
            for (int s = 0; s < n; ++s) {
                const double d = incs.increment(mode, s) - mean;
                var += d * d;
            }
            var /= (n - 1);
            const double se = dt * std::sqrt(2.0 / (n - 1));
            CHECK(std::abs(var - dt) < 5.0 * se);
        }
    }
    SUBCASE("growing N leaves earlier rows untouched") {
        const auto small = BrownianIncrements::sample(4, 50, 0.1, 9);
        const auto large = BrownianIncrements::sample(8, 50, 0.1, 9);
        for (int mode = 1; mode <= 4; ++mode)
            for (int s = 0; s < 50; ++s)
                CHECK(small.increment(mode, s) == large.increment(mode, s));
    }
    SUBCASE("W^0 row is the deterministic clock") {
        const auto incs = BrownianIncrements::sample(2, 10, 0.25, 1);
        for (int s = 0; s < 10; ++s) CHECK(incs.increment(0, s) == 0.25);
    }
    SUBCASE("coarsen aggregates adjacent increments") {
        const auto fine = BrownianIncrements::sample(2, 10, 0.1, 3);
        const auto coarse = fine.coarsen(2);
        CHECK(coarse.n_steps() == 5);
        CHECK(coarse.dt() == doctest::Approx(0.2).epsilon(1e-15));
        for (int mode = 1; mode <= 2; ++mode)
            for (int s = 0; s < 5; ++s)
                CHECK(coarse.increment(mode, s) ==
                      doctest::Approx(fine.increment(mode, 2 * s) +
                                      fine.increment(mode, 2 * s + 1)).epsilon(1e-15));
    }
    SUBCASE("binary dump round-trips bit-exactly") {
        namespace fs = std::filesystem;
        const auto incs = BrownianIncrements::sample(3, 20, 0.05, 77);
        const fs::path path = fs::temp_directory_path() / "spde_incs_test.bin";
        incs.save(path);
        const auto loaded = BrownianIncrements::load(path);
        CHECK(loaded.n_modes() == 3);
        CHECK(loaded.n_steps() == 20);
        CHECK(loaded.dt() == 0.05);
        CHECK(loaded.seed() == 77);
        CHECK(loaded.rows() == incs.rows());
        fs::remove(path);
    }
}

TEST_CASE("progressive measurability guard") {
    const auto incs = BrownianIncrements::sample(1, 10, 0.1, 5);
    const IncrementsPrefix prefix(incs, 4);
    CHECK_NOTHROW(prefix.increment(1, 3));
    CHECK_THROWS_AS(prefix.increment(1, 4), std::logic_error);
    double w = 0.0;
    for (int s = 0; s < 4; ++s) w += incs.increment(1, s);
    CHECK(prefix.path_value(1) == doctest::Approx(w).epsilon(1e-15));
}

TEST_CASE("noise increment term structure") {
    const GridPtr g = make_grid(1.0, 32);

    SUBCASE("zero field maps to zero") {
        const NoiseModel model = constant_mode_model(g, 1.0);
        const auto incs = BrownianIncrements::sample(1, 5, 0.1, 2);
        const RealField dz = noise_increment(RealField(g), model, incs, 0);
        for (int j = 0; j < dz.size(); ++j) CHECK(dz[j] == 0.0);
    }
    SUBCASE("drift only: c Z dt") {
        NoiseFamilySpec f;
        f.has_drift = true;
        f.drift_constant = 3.0;
        const NoiseModel model = build_noise_basis(f, 0, g);
        const auto incs = BrownianIncrements::sample(0, 5, 0.1, 2);
        const RealField z = sample_field(g, [](double x) { return 1.0 + x; });
        const RealField dz = noise_increment(z, model, incs, 2);
        for (int j = 0; j < dz.size(); ++j)
            CHECK(dz[j] == doctest::Approx(3.0 * z[j] * 0.1).epsilon(1e-14));
    }
    SUBCASE("single unit mode returns the increment everywhere") {
        const NoiseModel model = constant_mode_model(g, 1.0);
        const auto incs = BrownianIncrements::sample(1, 5, 0.1, 2);
        const RealField one = sample_field(g, [](double) { return 1.0; });
        const RealField dz = noise_increment(one, model, incs, 3);
        for (int j = 0; j < dz.size(); ++j)
            CHECK(dz[j] == doctest::Approx(incs.increment(1, 3)).epsilon(1e-15));
    }
}

TEST_CASE("Ito integral paths") {
    const GridPtr g = make_grid(1.0, 32);
    const int n_steps = 20;
    const double dt = 0.05;

    SUBCASE("zero integrand gives the zero path") {
        const NoiseModel model = constant_mode_model(g, 1.0);
        const auto incs = BrownianIncrements::sample(1, n_steps, dt, 4);
        const std::vector<RealField> path(static_cast<size_t>(n_steps), RealField(g));
        for (double v : ito_integral(path, model, incs)) CHECK(v == 0.0);
    }
    SUBCASE("pure drift integrates to 2L t") {
        NoiseFamilySpec f;
        f.has_drift = true;
        f.drift_constant = 1.0;
        const NoiseModel model = build_noise_basis(f, 0, g);
        const auto incs = BrownianIncrements::sample(0, n_steps, dt, 4);
        const std::vector<RealField> path(
            static_cast<size_t>(n_steps),
            sample_field(g, [](double) { return 1.0; }));
        const std::vector<double> integral = ito_integral(path, model, incs);
        for (int s = 0; s <= n_steps; ++s)
            CHECK(integral[static_cast<size_t>(s)] ==
                  doctest::Approx(2.0 * g->half_length() * dt * s).epsilon(1e-12));
    }
    SUBCASE("linearity in the integrand") {
        NoiseFamilySpec f = trig_family(1.0, 2.0);
        const NoiseModel model = build_noise_basis(f, 3, make_grid(M_PI, 64));
        const auto incs = BrownianIncrements::sample(3, n_steps, dt, 6);
        const GridPtr g2 = model.grid;
        std::vector<RealField> z1, z2, combo;
        for (int s = 0; s < n_steps; ++s) {
            z1.push_back(spde::testing::random_band_limited(g2, 10, 10 + s));
            z2.push_back(spde::testing::random_band_limited(g2, 10, 400 + s));
            RealField mix = 2.0 * z1.back();
            axpy(-3.0, z2.back(), mix);
            combo.push_back(mix);
        }
        const auto i1 = ito_integral(z1, model, incs);
        const auto i2 = ito_integral(z2, model, incs);
        const auto ic = ito_integral(combo, model, incs);
        for (size_t s = 0; s < ic.size(); ++s) {
            const double expected = 2.0 * i1[s] - 3.0 * i2[s];
            CHECK(ic[s] == doctest::Approx(expected).epsilon(1e-10));
        }
    }
    SUBCASE("martingale part has zero ensemble mean (3 SE)") {
        const NoiseModel model =
            build_noise_basis(trig_family(1.0, 2.0), 4, make_grid(M_PI, 64));
        const std::vector<RealField> path(
            static_cast<size_t>(n_steps),
            sample_field(model.grid, [](double x) { return std::exp(-x * x); }));
        const int n_seeds = 1000;
        double sum = 0.0, sum2 = 0.0;
        for (int seed = 0; seed < n_seeds; ++seed) {
            const auto incs = BrownianIncrements::sample(
                4, n_steps, dt, derive_seed(1234, static_cast<std::uint64_t>(seed)));
            const double m =
                ito_integral(path, model, incs, SpatialQuadrature::density,
                             DriftTerm::exclude).back();
            sum += m;
            sum2 += m * m;
        }
        const double mean = sum / n_seeds;
        const double var = (sum2 - n_seeds * mean * mean) / (n_seeds - 1);
        const double se = std::sqrt(var / n_seeds);
        CHECK(std::abs(mean) < 3.0 * se);
    }
    SUBCASE("Ito isometry against the discrete quadrature value (3 SE)") {
        const NoiseModel model =
            build_noise_basis(trig_family(1.0, 2.0), 4, make_grid(M_PI, 64));
        const RealField z =
            sample_field(model.grid, [](double x) { return std::exp(-x * x); });
        const std::vector<RealField> path(static_cast<size_t>(n_steps), z);
        // discrete variance: sum_i sum_s (int e^i z dxi)^2 dt
        double target = 0.0;
        for (int i = 0; i < model.n_modes(); ++i) {
            const double spatial = l2_inner(model.modes[static_cast<size_t>(i)], z);
            target += spatial * spatial * dt * n_steps;
        }
        const int n_seeds = 4000;
        double sum = 0.0, sum2 = 0.0;
        for (int seed = 0; seed < n_seeds; ++seed) {
            const auto incs = BrownianIncrements::sample(
                4, n_steps, dt, derive_seed(777, static_cast<std::uint64_t>(seed)));
            const double m =
                ito_integral(path, model, incs, SpatialQuadrature::density,
                             DriftTerm::exclude).back();
            sum += m;
            sum2 += m * m;
        }
        const double mean = sum / n_seeds;
        const double var = (sum2 - n_seeds * mean * mean) / (n_seeds - 1);
        const double se_var = var * std::sqrt(2.0 / (n_seeds - 1));
        CHECK(std::abs(var - target) < 3.0 * se_var);
    }
    SUBCASE("weights quadrature drops the dx factor") {
        const NoiseModel model = constant_mode_model(g, 1.0);
        const auto incs = BrownianIncrements::sample(1, n_steps, dt, 4);
        const std::vector<RealField> path(
            static_cast<size_t>(n_steps),
            sample_field(g, [](double) { return 1.0; }));
        const auto dens = ito_integral(path, model, incs, SpatialQuadrature::density);
        const auto wts = ito_integral(path, model, incs, SpatialQuadrature::weights);
        for (size_t s = 0; s < dens.size(); ++s)
            CHECK(wts[s] == doctest::Approx(dens[s] / g->dx()).epsilon(1e-12));
    }
}
