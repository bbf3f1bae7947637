#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "spde/coefficients.hpp"
#include "spde/noise.hpp"
#include "spde/trajectory.hpp"

namespace spde {

/// Produces the drift-difference field of the pair at snapshot j:
/// a * (z1 - z2) for the Fokker-Planck pair, psi(X1) - psi(X2) for the
/// porous-media pair.
using DriftDifferenceFn = std::function<RealField(
    int snapshot, const RealField& z1, const RealField& z2)>;

/// One rung of the mollifier ladder: the mollified energy path plus the
/// time-integrated L2 discrepancies whose vanishing drives the limit
/// argument (field, drift difference, noise products, H^-1 pairings).
struct MollifiedLadderEntry {
    double epsilon = 0.0;
    std::vector<double> g_eps;
    double field_discrepancy = 0.0;    // int ||z*phi - z||^2_L2 ds
    double drift_discrepancy = 0.0;    // int ||D*phi - D||^2_L2 ds
    double mode_discrepancy = 0.0;     // sum_i int ||(e^i z)*phi - e^i z||^2 ds
    double pairing_discrepancy = 0.0;  // sum_i int (<z_eps,(e^i z)*phi> - <z,e^i z>)^2_{H^-1} ds
    double max_energy_gap = 0.0;       // max_t |g_eps(t) - g(t)|
};

/// Everything the Gronwall checks consume, computed on the recorded
/// snapshot schedule with the solver's left-point rule.
struct EnergyLedger {
    double dt = 0.0;  // underlying solver step
    std::vector<double> times;
    std::vector<double> g;                 // ||z1-z2||^2_{H^-1}
    std::vector<double> martingale;        // reconstructed M_t
    std::vector<double> dissipation;       // int <z, D> ds
    std::vector<double> g_time_integral;   // left-point int g ds
    std::vector<double> l2_time_integral;  // left-point int ||z||^2_{L2} ds
    std::vector<double> hminus2_sq;        // ||z(t)||^2_{H^-2}
    double gronwall_constant = 0.0;
    double min_dissipation_increment = std::numeric_limits<double>::infinity();
    double martingale_quadratic_sum = 0.0;  // sum_i int <z, e^i z>^2_{H^-1} ds
    std::vector<MollifiedLadderEntry> ladder;
    /// Worst violation of the termwise 2ab <= a^2/alpha + alpha b^2 chain
    /// (porous-media pairs only; left unset otherwise).
    std::optional<double> bound_chain_violation;

    int n_snapshots() const noexcept { return static_cast<int>(times.size()); }
};

struct LedgerOptions {
    double gronwall_constant = 0.0;
    std::vector<double> epsilons;  // mollifier ladder widths (absolute)
    /// Set to 1/alpha = Lip(psi) for porous-media pairs to enable the
    /// bound-chain witness.
    std::optional<double> inv_alpha;
};

EnergyLedger build_energy_ledger(const Trajectory& t1, const Trajectory& t2,
                                 const NoiseModel& noise,
                                 const BrownianIncrements& incs,
                                 const DriftDifferenceFn& drift_difference,
                                 const LedgerOptions& opts);

/// g(t) = ||z1(t) - z2(t)||^2_{H^-1} on the recorded schedule.
std::vector<double> energy_path(const Trajectory& t1, const Trajectory& t2);

/// Mollifier ladder on its own (epsilons must be decreasing).
std::vector<MollifiedLadderEntry> mollified_energy_path(
    const Trajectory& t1, const Trajectory& t2, const NoiseModel& noise,
    const std::vector<double>& epsilons,
    const DriftDifferenceFn& drift_difference);

/// sum_i C(e^i)^2 + 2 C(e^0) + ||a||_inf.
double gronwall_constant_fp(const NoiseModel& noise,
                            const DiffusionCoefficient& a);
/// 2 C(e^0) + sum_i C(e^i)^2 + 1/alpha.
double gronwall_constant_pme(const NoiseModel& noise, const Nonlinearity& psi);

/// Reconstructed martingale term, left-point rule:
/// M += 2 sum_i <z, e^i z>_{H^-1} dW^i per underlying step.
std::vector<double> martingale_path(const Trajectory& t1, const Trajectory& t2,
                                    const NoiseModel& noise,
                                    const BrownianIncrements& incs);

/// First recorded time at which int_0^t ||z||^2_{L2} ds >= level or
/// ||z(t)||^2_{H^-2} >= level; +infinity when neither ever triggers.
/// Levels must be increasing; the result is nondecreasing.
std::vector<double> localization_times(const Trajectory& t1,
                                       const Trajectory& t2,
                                       const std::vector<double>& levels);

struct GronwallVerdict {
    bool pathwise_pass = false;
    double lhs_max = 0.0;  // max_t [g + dissipation - g(0) - M - C int g]
    double slack = 0.0;
    double margin = 0.0;          // slack - lhs_max (>= 0 passes)
    double margin_at_2C = 0.0;    // same margin with C doubled
    double margin_at_half_C = 0.0;
};

/// Pathwise Gronwall inequality check. The energy identity is anchored at
/// g(0) so perturbed pairs (g(0) > 0) are covered; for equal initial data it
/// reduces to the unanchored inequality. Default slack: 10 dt (1+C) sup g.
GronwallVerdict gronwall_check(const EnergyLedger& ledger,
                               double slack_override = -1.0);

struct EnsembleEnvelope {
    std::vector<double> times;
    std::vector<double> mean_g;
    std::vector<double> standard_error;
    std::vector<double> envelope;  // e^{Ct} mean g(0) (1+tol) + 3 SE
    bool pass = false;
    double max_excess = 0.0;  // max_t (mean_g - envelope)
};

/// Exponential moment bound across an ensemble of g paths sharing one
/// snapshot schedule.
EnsembleEnvelope ensemble_envelope(const std::vector<std::vector<double>>& g_paths,
                                   const std::vector<double>& times, double C,
                                   double tol);

}  // namespace spde
