#include "spde/coefficients.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "spde/errors.hpp"

namespace spde {

DiffusionCoefficient::DiffusionCoefficient(Sampler sampler, double sup_bound,
                                           bool random, std::string description)
    : sampler_(std::move(sampler)), sup_bound_(sup_bound), random_(random),
      description_(std::move(description)) {
    if (!(sup_bound_ >= 0.0))
        throw AssumptionViolation(
            "diffusion coefficient must have a finite nonnegative sup bound");
}

RealField DiffusionCoefficient::at(int step, const GridPtr& grid,
                                   const IncrementsPrefix& history) const {
    RealField out(grid);
    sampler_(step, *grid, history, std::span<double>(out.values));
    const double slack = 1e-12 * (1.0 + sup_bound_);
    for (int j = 0; j < out.size(); ++j) {
        const double v = out[j];
        if (!(v >= -slack) || !(v <= sup_bound_ + slack))
            throw AssumptionViolation(
                "diffusion coefficient left [0, sup] at a grid node: " +
                description_);
    }
    return out;
}

DiffusionCoefficient DiffusionCoefficient::constant(double value) {
    if (!(value >= 0.0))
        throw AssumptionViolation("diffusion coefficient must be nonnegative");
    return DiffusionCoefficient(
        [value](int, const Grid1D&, const IncrementsPrefix&, std::span<double> out) {
            for (double& v : out) v = value;
        },
        value, false, "constant a = " + std::to_string(value));
}

DiffusionCoefficient DiffusionCoefficient::indicator(double value, double lo,
                                                     double hi) {
    if (!(value >= 0.0))
        throw AssumptionViolation("diffusion coefficient must be nonnegative");
    return DiffusionCoefficient(
        [value, lo, hi](int, const Grid1D& grid, const IncrementsPrefix&,
                        std::span<double> out) {
            for (int j = 0; j < grid.n_points(); ++j) {
                const double xi = grid.node(j);
                out[static_cast<size_t>(j)] = (xi >= lo && xi <= hi) ? value : 0.0;
            }
        },
        value, false, "indicator a on [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
}

DiffusionCoefficient DiffusionCoefficient::path_modulated(double base,
                                                          double gain, int mode) {
    if (!(base >= 0.0) || !(gain >= 0.0) || gain > 1.0)
        throw std::invalid_argument("path_modulated needs base >= 0, gain in [0,1]");
    const double sup = base;  // (1 + gain tanh)/(1+gain) <= 1
    return DiffusionCoefficient(
        [base, gain, mode](int, const Grid1D& grid, const IncrementsPrefix& history,
                           std::span<double> out) {
            const double w = history.path_value(mode);
            const double level = base * (1.0 + gain * std::tanh(w)) / (1.0 + gain);
            for (int j = 0; j < grid.n_points(); ++j)
                out[static_cast<size_t>(j)] = level;
        },
        sup, true, "path-modulated a");
}

Nonlinearity Nonlinearity::identity() {
    return Nonlinearity{[](double x) { return x; }, 1.0, "identity"};
}

Nonlinearity Nonlinearity::arctan() {
    return Nonlinearity{[](double x) { return std::atan(x); }, 1.0, "arctan"};
}

Nonlinearity Nonlinearity::saturated_power(double m, double K) {
    if (!(m >= 1.0) || !(K > 0.0))
        throw std::invalid_argument("saturated_power needs m >= 1 and K > 0");
    const double scale = m * std::pow(K, m - 1.0);
    auto psi = [m, K, scale](double x) {
        const double a = std::min(std::abs(x), K);
        return std::copysign(std::pow(a, m) / scale, x);
    };
    return Nonlinearity{psi, 1.0,
                        "saturated_power(m=" + std::to_string(m) +
                            ", K=" + std::to_string(K) + ")"};
}

Nonlinearity Nonlinearity::zero() {
    return Nonlinearity{[](double) { return 0.0; }, 0.0, "zero"};
}

AlphaReport psi_alpha_check(const Nonlinearity& nl, double range,
                            int lattice_points) {
    if (lattice_points < 2 || !(range > 0.0))
        throw std::invalid_argument("psi_alpha_check needs a nondegenerate lattice");
    AlphaReport report;
    const double step = 2.0 * range / (lattice_points - 1);
    std::vector<double> r(static_cast<size_t>(lattice_points));
    std::vector<double> pr(static_cast<size_t>(lattice_points));
    for (int i = 0; i < lattice_points; ++i) {
        r[static_cast<size_t>(i)] = -range + step * i;
        pr[static_cast<size_t>(i)] = nl.psi(r[static_cast<size_t>(i)]);
    }
    const double lip_slack = nl.lipschitz * 1e-9 + 1e-15;
    for (int i = 0; i < lattice_points; ++i) {
        for (int j = i + 1; j < lattice_points; ++j) {
            const double dr = r[static_cast<size_t>(j)] - r[static_cast<size_t>(i)];
            const double dp = pr[static_cast<size_t>(j)] - pr[static_cast<size_t>(i)];
            if (dp < -1e-15) {
                ++report.violations;
                throw AssumptionViolation(
                    "nonlinearity is not monotone increasing on the sampled "
                    "lattice: " + nl.name);
            }
            const double ratio = std::abs(dp) / dr;
            report.max_lipschitz_ratio = std::max(report.max_lipschitz_ratio, ratio);
            if (ratio > nl.lipschitz + lip_slack) {
                ++report.violations;
                throw AssumptionViolation(
                    "nonlinearity exceeds its declared Lipschitz constant on "
                    "the sampled lattice: " + nl.name);
            }
            if (std::abs(dp) > 0.0)
                report.min_alpha = std::min(report.min_alpha, dr / dp);
        }
    }
    return report;
}

}  // namespace spde
