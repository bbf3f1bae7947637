#pragma once

#include <functional>
#include <memory>
#include <string>

#include "spde/grid.hpp"
#include "spde/noise.hpp"

namespace spde {

/// Bounded nonnegative diffusion coefficient a(t, xi), possibly degenerate
/// and possibly path dependent. Path-dependent coefficients receive only the
/// increments generated before the current step (IncrementsPrefix), which
/// realizes the progressive-measurability contract structurally.
class DiffusionCoefficient {
public:
    using Sampler = std::function<void(int step, const Grid1D& grid,
                                       const IncrementsPrefix& history,
                                       std::span<double> out)>;

    DiffusionCoefficient(Sampler sampler, double sup_bound, bool random,
                         std::string description);

    /// Tabulate a at the given step; validates 0 <= a <= sup_bound nodewise.
    RealField at(int step, const GridPtr& grid,
                 const IncrementsPrefix& history) const;

    double sup_bound() const noexcept { return sup_bound_; }
    bool is_random() const noexcept { return random_; }
    const std::string& description() const noexcept { return description_; }

    static DiffusionCoefficient constant(double value);
    /// a = value on [lo, hi], 0 outside (degenerate diffusion).
    static DiffusionCoefficient indicator(double value, double lo, double hi);
    /// Path-dependent demo: a = base * (1 + gain * tanh(W^mode_t)) / (1+gain),
    /// progressively measurable through the increments prefix.
    static DiffusionCoefficient path_modulated(double base, double gain, int mode);

private:
    Sampler sampler_;
    double sup_bound_;
    bool random_;
    std::string description_;
};

/// Monotone Lipschitz nonlinearity with psi(0) = 0, together with the
/// declared Lipschitz constant. alpha = 1/Lip is the constant in the
/// monotonicity inequality (psi(r)-psi(rb))(r-rb) >= alpha (psi(r)-psi(rb))^2.
struct Nonlinearity {
    std::function<double(double)> psi;
    double lipschitz = 1.0;
    std::string name;

    double inv_alpha() const noexcept { return lipschitz; }

    RealField apply(const RealField& x) const {
        RealField out(x.grid);
        for (int j = 0; j < x.size(); ++j) out[j] = psi(x[j]);
        return out;
    }

    static Nonlinearity identity();
    static Nonlinearity arctan();
    /// sign(x) min(|x|,K)^m / (m K^{m-1}): Lipschitz-saturated power law,
    /// requires m >= 1 and K > 0. Lipschitz constant 1.
    static Nonlinearity saturated_power(double m, double K);
    static Nonlinearity zero();
};

struct AlphaReport {
    double max_lipschitz_ratio = 0.0;
    double min_alpha = std::numeric_limits<double>::infinity();
    int violations = 0;
};

/// Check monotonicity, the declared Lipschitz constant, and the alpha
/// inequality on a lattice of value pairs covering [-range, range].
/// Throws AssumptionViolation when any sampled pair violates them.
AlphaReport psi_alpha_check(const Nonlinearity& psi, double range = 10.0,
                            int lattice_points = 100);

}  // namespace spde
