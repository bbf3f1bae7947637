#include "spde/energy.hpp"

#include <cmath>
#include <stdexcept>

#include "spde/mollifier.hpp"
#include "spde/spectral.hpp"

namespace spde {

namespace {

void check_pair(const Trajectory& t1, const Trajectory& t2) {
    if (!t1.grid()->compatible(*t2.grid()))
        throw std::invalid_argument("trajectory pair lives on different grids");
    if (!t1.same_schedule(t2))
        throw std::invalid_argument("trajectory pair has mismatched snapshot schedules");
}

}  // namespace

std::vector<double> energy_path(const Trajectory& t1, const Trajectory& t2) {
    check_pair(t1, t2);
    std::vector<double> g(static_cast<size_t>(t1.n_snapshots()));
    for (int j = 0; j < t1.n_snapshots(); ++j) {
        const double norm = sobolev_norm(t1.snapshot(j) - t2.snapshot(j), -1.0);
        g[static_cast<size_t>(j)] = norm * norm;
    }
    return g;
}

double gronwall_constant_fp(const NoiseModel& noise,
                            const DiffusionCoefficient& a) {
    double c = a.sup_bound() + 2.0 * noise.drift_multiplier_bound;
    for (double ci : noise.multiplier_bounds) c += ci * ci;
    return c;
}

double gronwall_constant_pme(const NoiseModel& noise, const Nonlinearity& psi) {
    double c = psi.inv_alpha() + 2.0 * noise.drift_multiplier_bound;
    for (double ci : noise.multiplier_bounds) c += ci * ci;
    return c;
}

std::vector<double> martingale_path(const Trajectory& t1, const Trajectory& t2,
                                    const NoiseModel& noise,
                                    const BrownianIncrements& incs) {
    check_pair(t1, t2);
    std::vector<double> m(static_cast<size_t>(t1.n_snapshots()), 0.0);
    for (int j = 0; j + 1 < t1.n_snapshots(); ++j) {
        const RealField z = t1.snapshot(j) - t2.snapshot(j);
        const RealField smoothed = bessel_potential(z, -2.0);
        double aggregate = 0.0;
        for (int i = 0; i < noise.n_modes(); ++i) {
            const double pairing =
                l2_inner(pointwise_product(noise.modes[static_cast<size_t>(i)], z),
                         smoothed);
            double dw = 0.0;
            for (int u = t1.step_of(j); u < t1.step_of(j + 1); ++u)
                dw += incs.increment(i + 1, u);
            aggregate += 2.0 * pairing * dw;
        }
        m[static_cast<size_t>(j) + 1] = m[static_cast<size_t>(j)] + aggregate;
    }
    return m;
}

std::vector<MollifiedLadderEntry> mollified_energy_path(
    const Trajectory& t1, const Trajectory& t2, const NoiseModel& noise,
    const std::vector<double>& epsilons,
    const DriftDifferenceFn& drift_difference) {
    check_pair(t1, t2);
    for (size_t i = 1; i < epsilons.size(); ++i)
        if (!(epsilons[i] < epsilons[i - 1]))
            throw std::invalid_argument("mollifier ladder must be decreasing");

    const std::vector<double> g = energy_path(t1, t2);
    std::vector<MollifiedLadderEntry> ladder;
    ladder.reserve(epsilons.size());
    for (double eps : epsilons) {
        const MollifierSpec moll = make_mollifier(t1.grid(), eps);
        MollifiedLadderEntry entry;
        entry.epsilon = eps;
        entry.g_eps.resize(static_cast<size_t>(t1.n_snapshots()));
        for (int j = 0; j < t1.n_snapshots(); ++j) {
            const RealField z = t1.snapshot(j) - t2.snapshot(j);
            const RealField z_eps = mollify(z, moll);
            const double ge = sobolev_norm(z_eps, -1.0);
            entry.g_eps[static_cast<size_t>(j)] = ge * ge;
            entry.max_energy_gap = std::max(
                entry.max_energy_gap,
                std::abs(entry.g_eps[static_cast<size_t>(j)] - g[static_cast<size_t>(j)]));
            if (j + 1 == t1.n_snapshots()) continue;  // integrals are left-point

            const double window = t1.dt() * (t1.step_of(j + 1) - t1.step_of(j));
            const RealField fd = z_eps - z;
            entry.field_discrepancy += window * l2_inner(fd, fd);

            const RealField drift = drift_difference(j, t1.snapshot(j), t2.snapshot(j));
            const RealField dd = mollify(drift, moll) - drift;
            entry.drift_discrepancy += window * l2_inner(dd, dd);

            for (int i = -1; i < noise.n_modes(); ++i) {
                const RealField& e = (i < 0) ? noise.drift
                                             : noise.modes[static_cast<size_t>(i)];
                const RealField ez = pointwise_product(e, z);
                const RealField ez_eps = mollify(ez, moll);
                const RealField md = ez_eps - ez;
                entry.mode_discrepancy += window * l2_inner(md, md);
                const double pairing_gap =
                    h_minus1_inner(z_eps, ez_eps) - h_minus1_inner(z, ez);
                entry.pairing_discrepancy += window * pairing_gap * pairing_gap;
            }
        }
        ladder.push_back(std::move(entry));
    }
    return ladder;
}

std::vector<double> localization_times(const Trajectory& t1,
                                       const Trajectory& t2,
                                       const std::vector<double>& levels) {
    check_pair(t1, t2);
    for (size_t i = 1; i < levels.size(); ++i)
        if (!(levels[i] > levels[i - 1]))
            throw std::invalid_argument("localization levels must be increasing");

    const int n = t1.n_snapshots();
    std::vector<double> l2_cum(static_cast<size_t>(n), 0.0);
    std::vector<double> hm2(static_cast<size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        const RealField z = t1.snapshot(j) - t2.snapshot(j);
        if (j + 1 < n) {
            const double window = t1.dt() * (t1.step_of(j + 1) - t1.step_of(j));
            const double norm = l2_norm(z);
            l2_cum[static_cast<size_t>(j) + 1] =
                l2_cum[static_cast<size_t>(j)] + window * norm * norm;
        }
        const double h = sobolev_norm(z, -2.0);
        hm2[static_cast<size_t>(j)] = h * h;
    }
    std::vector<double> out;
    out.reserve(levels.size());
    for (double level : levels) {
        double tau = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j) {
            if (l2_cum[static_cast<size_t>(j)] >= level ||
                hm2[static_cast<size_t>(j)] >= level) {
                tau = t1.time_of(j);
                break;
            }
        }
        out.push_back(tau);
    }
    return out;
}

EnergyLedger build_energy_ledger(const Trajectory& t1, const Trajectory& t2,
                                 const NoiseModel& noise,
                                 const BrownianIncrements& incs,
                                 const DriftDifferenceFn& drift_difference,
                                 const LedgerOptions& opts) {
    check_pair(t1, t2);
    const int n = t1.n_snapshots();
    EnergyLedger ledger;
    ledger.dt = t1.dt();
    ledger.gronwall_constant = opts.gronwall_constant;
    ledger.times.resize(static_cast<size_t>(n));
    ledger.g.resize(static_cast<size_t>(n));
    ledger.martingale.assign(static_cast<size_t>(n), 0.0);
    ledger.dissipation.assign(static_cast<size_t>(n), 0.0);
    ledger.g_time_integral.assign(static_cast<size_t>(n), 0.0);
    ledger.l2_time_integral.assign(static_cast<size_t>(n), 0.0);
    ledger.hminus2_sq.resize(static_cast<size_t>(n));

    double chain_violation = 0.0;
    for (int j = 0; j < n; ++j) {
        const auto idx = static_cast<size_t>(j);
        const RealField z = t1.snapshot(j) - t2.snapshot(j);
        ledger.times[idx] = t1.time_of(j);
        const double gnorm = sobolev_norm(z, -1.0);
        ledger.g[idx] = gnorm * gnorm;
        const double hm2 = sobolev_norm(z, -2.0);
        ledger.hminus2_sq[idx] = hm2 * hm2;

        if (j + 1 == n) break;
        const double window = t1.dt() * (t1.step_of(j + 1) - t1.step_of(j));
        const RealField smoothed = bessel_potential(z, -2.0);

        // martingale + its quadratic-variation surrogate
        double aggregate = 0.0;
        for (int i = 0; i < noise.n_modes(); ++i) {
            const double pairing = l2_inner(
                pointwise_product(noise.modes[static_cast<size_t>(i)], z), smoothed);
            double dw = 0.0;
            for (int u = t1.step_of(j); u < t1.step_of(j + 1); ++u)
                dw += incs.increment(i + 1, u);
            aggregate += 2.0 * pairing * dw;
            ledger.martingale_quadratic_sum += window * pairing * pairing;
        }
        ledger.martingale[idx + 1] = ledger.martingale[idx] + aggregate;

        // dissipation <z, D>_{L2}
        const RealField drift = drift_difference(j, t1.snapshot(j), t2.snapshot(j));
        const double diss_rate = l2_inner(z, drift);
        ledger.min_dissipation_increment =
            std::min(ledger.min_dissipation_increment, window * diss_rate);
        ledger.dissipation[idx + 1] = ledger.dissipation[idx] + window * diss_rate;

        ledger.g_time_integral[idx + 1] =
            ledger.g_time_integral[idx] + window * ledger.g[idx];
        const double l2 = l2_norm(z);
        ledger.l2_time_integral[idx + 1] =
            ledger.l2_time_integral[idx] + window * l2 * l2;

        if (opts.inv_alpha) {
            // Termwise witnesses of the alpha bound chain on the stored
            // fields: Cauchy-Schwarz/Young step, the H^-2 <= H^-1 step and
            // the alpha inequality step.
            const double inv_alpha = *opts.inv_alpha;
            const double lhs = 2.0 * l2_inner(smoothed, drift);
            const double a2 = l2_inner(smoothed, smoothed);
            const double b2 = l2_inner(drift, drift);
            if (inv_alpha > 0.0) {
                const double alpha = 1.0 / inv_alpha;
                chain_violation = std::max(
                    chain_violation, lhs - (inv_alpha * a2 + alpha * b2));
                chain_violation =
                    std::max(chain_violation, alpha * b2 - diss_rate);
            }
            chain_violation = std::max(chain_violation, a2 - ledger.g[idx]);
        }
    }
    if (opts.inv_alpha) ledger.bound_chain_violation = chain_violation;

    if (!opts.epsilons.empty())
        ledger.ladder = mollified_energy_path(t1, t2, noise, opts.epsilons,
                                              drift_difference);
    return ledger;
}

namespace {

double pathwise_lhs_max(const EnergyLedger& ledger, double C) {
    double worst = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < ledger.n_snapshots(); ++j) {
        const auto idx = static_cast<size_t>(j);
        const double lhs = ledger.g[idx] + ledger.dissipation[idx] -
                           ledger.g[0] - ledger.martingale[idx] -
                           C * ledger.g_time_integral[idx];
        worst = std::max(worst, lhs);
    }
    return worst;
}

double default_slack(const EnergyLedger& ledger, double C) {
    double sup_g = 0.0;
    for (double v : ledger.g) sup_g = std::max(sup_g, v);
    return 10.0 * ledger.dt * (1.0 + C) * sup_g;
}

}  // namespace

GronwallVerdict gronwall_check(const EnergyLedger& ledger,
                               double slack_override) {
    const double C = ledger.gronwall_constant;
    GronwallVerdict verdict;
    verdict.lhs_max = pathwise_lhs_max(ledger, C);
    verdict.slack = (slack_override >= 0.0) ? slack_override
                                            : default_slack(ledger, C);
    verdict.margin = verdict.slack - verdict.lhs_max;
    verdict.pathwise_pass = verdict.lhs_max <= verdict.slack;
    verdict.margin_at_2C =
        default_slack(ledger, 2.0 * C) - pathwise_lhs_max(ledger, 2.0 * C);
    verdict.margin_at_half_C =
        default_slack(ledger, 0.5 * C) - pathwise_lhs_max(ledger, 0.5 * C);
    return verdict;
}

EnsembleEnvelope ensemble_envelope(const std::vector<std::vector<double>>& g_paths,
                                   const std::vector<double>& times, double C,
                                   double tol) {
    if (g_paths.empty()) throw std::invalid_argument("empty ensemble");
    const size_t n = times.size();
    for (const auto& path : g_paths)
        if (path.size() != n)
            throw std::invalid_argument("ensemble paths have mismatched schedules");

    const double paths = static_cast<double>(g_paths.size());
    EnsembleEnvelope env;
    env.times = times;
    env.mean_g.assign(n, 0.0);
    env.standard_error.assign(n, 0.0);
    env.envelope.assign(n, 0.0);
    for (size_t j = 0; j < n; ++j) {
        double mean = 0.0;
        for (const auto& path : g_paths) mean += path[j];
        mean /= paths;
        double var = 0.0;
        for (const auto& path : g_paths) {
            const double d = path[j] - mean;
            var += d * d;
        }
        var = (g_paths.size() > 1) ? var / (paths - 1.0) : 0.0;
        env.mean_g[j] = mean;
        env.standard_error[j] = std::sqrt(var / paths);
    }
    env.pass = true;
    env.max_excess = -std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < n; ++j) {
        env.envelope[j] = std::exp(C * times[j]) * env.mean_g[0] * (1.0 + tol) +
                          3.0 * env.standard_error[j];
        const double excess = env.mean_g[j] - env.envelope[j];
        env.max_excess = std::max(env.max_excess, excess);
        if (excess > 0.0) env.pass = false;
    }
    return env;
}

}  // namespace spde
