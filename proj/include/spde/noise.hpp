#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spde/grid.hpp"

namespace spde {

/// Seeded Wiener increments, one independent stream per mode so the paths of
/// modes 1..N do not change when N grows. Mode 0 is the deterministic clock
/// convention: increment(0, s) == dt for every s.
class BrownianIncrements {
public:
    static BrownianIncrements sample(int n_modes, int n_steps, double dt,
                                     std::uint64_t seed);
    /// Wrap externally produced rows (row-major, n_modes x n_steps).
    static BrownianIncrements from_rows(int n_modes, int n_steps, double dt,
                                        std::uint64_t seed,
                                        std::vector<double> rows);

    int n_modes() const noexcept { return n_modes_; }
    int n_steps() const noexcept { return n_steps_; }
    double dt() const noexcept { return dt_; }
    std::uint64_t seed() const noexcept { return seed_; }

    /// mode 0 returns dt; modes 1..N return the sampled increment.
    double increment(int mode, int step) const;

    /// Sum adjacent groups of `factor` increments (dt scales accordingly).
    BrownianIncrements coarsen(int factor) const;

    /// Flat binary dump: header of four little-endian 64-bit words
    /// (N, n_steps, dt bits, seed) followed by row-major doubles.
    void save(const std::filesystem::path& path) const;
    static BrownianIncrements load(const std::filesystem::path& path);

    const std::vector<double>& rows() const noexcept { return data_; }

private:
    BrownianIncrements(int n_modes, int n_steps, double dt, std::uint64_t seed,
                       std::vector<double> data);

    int n_modes_ = 0;
    int n_steps_ = 0;
    double dt_ = 0.0;
    std::uint64_t seed_ = 0;
    std::vector<double> data_;  // [mode-1][step] for modes 1..N
};

/// Read-only view of the increments truncated at a step limit. Handed to
/// path-dependent coefficients so progressive measurability is enforced
/// structurally: reads at or beyond the limit throw.
class IncrementsPrefix {
public:
    IncrementsPrefix(const BrownianIncrements& incs, int limit)
        : incs_(&incs), limit_(limit) {}

    double increment(int mode, int step) const;
    /// Path value W^mode at the prefix end (sum of visible increments).
    double path_value(int mode) const;
    int limit() const noexcept { return limit_; }

private:
    const BrownianIncrements* incs_;
    int limit_;
};

enum class NoiseFamilyKind { off, trig, gaussian, tabulated };

/// Parameters for the built-in basis families.
///  - trig:     e^i = (c/i^p) w(xi) cos(i pi xi / L), smooth plateau window w
///              supported on |xi| <= window_fraction*L (w == 1 if the
///              fraction is 0); requires p > 3/2.
///  - gaussian: e^i = (c/i^p) exp(-(xi-c_i)^2/(2 width^2)) with centers
///              spread over the middle half of the domain; requires p > 1/2.
///  - tabulated: caller-provided fields; derivatives computed spectrally.
struct NoiseFamilySpec {
    NoiseFamilyKind kind = NoiseFamilyKind::off;
    double c = 1.0;
    double p = 2.0;
    double window_fraction = 0.8;  // trig family; 0 => no window
    double width = 0.3;            // gaussian family (absolute length)
    std::vector<std::vector<double>> tabulated_modes;

    // Drift component e^0: zero unless configured.
    bool has_drift = false;
    std::vector<double> drift_values;  // sampled e^0 (empty => constant)
    double drift_constant = 0.0;
};

/// The noise basis together with everything the energy estimates consume:
/// analytic derivatives, grid sup norms, multiplier bounds, and the declared
/// tail of the summability series when the family has a closed form.
struct NoiseModel {
    GridPtr grid;
    RealField drift;             // e^0
    RealField drift_derivative;
    std::vector<RealField> modes;             // e^1..e^N
    std::vector<RealField> mode_derivatives;  // (e^i)'
    std::vector<double> mode_sup;        // ||e^i||_inf over grid nodes
    std::vector<double> mode_deriv_sup;  // ||(e^i)'||_inf over grid nodes
    std::vector<double> multiplier_bounds;  // C(e^i), i = 1..N
    double drift_multiplier_bound = 0.0;    // C(e^0)
    double summability_partial = 0.0;  // sum_{i<=N} (||e^i'||^2 + ||e^i||^2)
    double declared_tail = 0.0;        // analytic bound on the i>N remainder
    bool has_closed_form_tail = false;

    int n_modes() const noexcept { return static_cast<int>(modes.size()); }
};

NoiseModel build_noise_basis(const NoiseFamilySpec& family, int n_modes,
                             const GridPtr& grid);

/// sqrt(2) (||e||_inf^2 + ||e'||_inf^2)^{1/2} with grid sup norms.
double multiplier_norm_bound(const RealField& e, const RealField& e_prime);

/// Largest ratio ||e g||_{H^-1}/||g||_{H^-1} and ||e g||_{H^1}/||g||_{H^1}
/// over the probe set; a lower bound on the true multiplier norm. Zero
/// probes are skipped with a warning on stderr.
double multiplier_norm_empirical(const RealField& e,
                                 const std::vector<RealField>& probes);

/// Probe generator for the empirical multiplier norm: random fields band
/// limited to |m| <= n/8, plus centered Gaussians at a few widths.
std::vector<RealField> make_probes(const GridPtr& grid, int count,
                                   std::uint64_t seed);

/// xi -> sum_{i=1..N} e^i(xi) Z(xi) dW^i_step + e^0(xi) Z(xi) dt
/// (left-point evaluation of Z).
RealField noise_increment(const RealField& z, const NoiseModel& noise,
                          const BrownianIncrements& incs, int step);

enum class SpatialQuadrature { density, weights };
enum class DriftTerm { include, exclude };

/// Cumulative Ito integral of the space-integrated field against the noise:
/// t_m -> sum_{s<m} sum_i (sum_xi e^i Z(s,xi) q(xi)) dW^i_s, with q = dx for
/// densities and q = 1 for weight vectors. `z_path` must supply the field at
/// every step s in [0, n_steps). DriftTerm::exclude drops the i = 0 term
/// (the martingale part).
std::vector<double> ito_integral(const std::vector<RealField>& z_path,
                                 const NoiseModel& noise,
                                 const BrownianIncrements& incs,
                                 SpatialQuadrature quad = SpatialQuadrature::density,
                                 DriftTerm drift = DriftTerm::include);

}  // namespace spde
