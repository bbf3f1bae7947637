#include "spde/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "spde/errors.hpp"
#include "spde/rng.hpp"
#include "spde/spectral.hpp"

namespace spde {

// ---------------------------------------------------------------------------
// BrownianIncrements
// ---------------------------------------------------------------------------

BrownianIncrements::BrownianIncrements(int n_modes, int n_steps, double dt,
                                       std::uint64_t seed,
                                       std::vector<double> data)
    : n_modes_(n_modes), n_steps_(n_steps), dt_(dt), seed_(seed),
      data_(std::move(data)) {}

BrownianIncrements BrownianIncrements::sample(int n_modes, int n_steps,
                                              double dt, std::uint64_t seed) {
    if (n_modes < 0 || n_steps < 1 || !(dt > 0.0))
        throw std::invalid_argument("increments: need n_modes >= 0, n_steps >= 1, dt > 0");
    std::vector<double> data(static_cast<size_t>(n_modes) * n_steps);
    const double scale = std::sqrt(dt);
    for (int i = 0; i < n_modes; ++i) {
        // One stream per mode id (1-based), so rows are stable under N growth.
        NormalStream stream(derive_seed(seed, static_cast<std::uint64_t>(i + 1)));
        double* row = data.data() + static_cast<size_t>(i) * n_steps;
        for (int s = 0; s < n_steps; ++s) row[s] = scale * stream.next();
    }
    return BrownianIncrements(n_modes, n_steps, dt, seed, std::move(data));
}

BrownianIncrements BrownianIncrements::from_rows(int n_modes, int n_steps,
                                                 double dt, std::uint64_t seed,
                                                 std::vector<double> rows) {
    if (rows.size() != static_cast<size_t>(n_modes) * n_steps)
        throw std::invalid_argument("increments: row data has wrong length");
    return BrownianIncrements(n_modes, n_steps, dt, seed, std::move(rows));
}

double BrownianIncrements::increment(int mode, int step) const {
    if (step < 0 || step >= n_steps_)
        throw std::out_of_range("increment step out of range");
    if (mode == 0) return dt_;
    if (mode < 1 || mode > n_modes_)
        throw std::out_of_range("increment mode out of range");
    return data_[static_cast<size_t>(mode - 1) * n_steps_ + step];
}

BrownianIncrements BrownianIncrements::coarsen(int factor) const {
    if (factor < 1 || n_steps_ % factor != 0)
        throw std::invalid_argument("coarsen factor must divide n_steps");
    const int coarse_steps = n_steps_ / factor;
    std::vector<double> data(static_cast<size_t>(n_modes_) * coarse_steps, 0.0);
    for (int i = 0; i < n_modes_; ++i) {
        const double* src = data_.data() + static_cast<size_t>(i) * n_steps_;
        double* dst = data.data() + static_cast<size_t>(i) * coarse_steps;
        for (int s = 0; s < coarse_steps; ++s)
            for (int u = 0; u < factor; ++u) dst[s] += src[s * factor + u];
    }
    return BrownianIncrements(n_modes_, coarse_steps, dt_ * factor, seed_,
                              std::move(data));
}

namespace {
void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}
std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}
}  // namespace

void BrownianIncrements::save(const std::filesystem::path& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    std::uint64_t dt_bits;
    std::memcpy(&dt_bits, &dt_, 8);
    put_u64(os, static_cast<std::uint64_t>(n_modes_));
    put_u64(os, static_cast<std::uint64_t>(n_steps_));
    put_u64(os, dt_bits);
    put_u64(os, seed_);
    for (double v : data_) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        put_u64(os, bits);
    }
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

BrownianIncrements BrownianIncrements::load(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    const auto n_modes = static_cast<int>(get_u64(is));
    const auto n_steps = static_cast<int>(get_u64(is));
    const std::uint64_t dt_bits = get_u64(is);
    const std::uint64_t seed = get_u64(is);
    double dt;
    std::memcpy(&dt, &dt_bits, 8);
    if (!is || n_modes < 0 || n_steps < 1 || !(dt > 0.0))
        throw std::runtime_error("corrupt increments header in " + path.string());
    std::vector<double> data(static_cast<size_t>(n_modes) * n_steps);
    for (double& v : data) {
        const std::uint64_t bits = get_u64(is);
        std::memcpy(&v, &bits, 8);
    }
    if (!is) throw std::runtime_error("truncated increments file " + path.string());
    return BrownianIncrements(n_modes, n_steps, dt, seed, std::move(data));
}

double IncrementsPrefix::increment(int mode, int step) const {
    if (step >= limit_)
        throw std::logic_error(
            "coefficient tried to read a Wiener increment from the future");
    return incs_->increment(mode, step);
}

double IncrementsPrefix::path_value(int mode) const {
    double acc = 0.0;
    for (int s = 0; s < limit_; ++s) acc += incs_->increment(mode, s);
    return acc;
}

// ---------------------------------------------------------------------------
// Basis construction
// ---------------------------------------------------------------------------

namespace {

// C^inf step: 0 for u<=0, 1 for u>=1.
double smoothstep(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / u);
    const double b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
}

double smoothstep_derivative(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double a = std::exp(-1.0 / u);
    const double b = std::exp(-1.0 / (1.0 - u));
    const double ap = a / (u * u);
    const double bp = -b / ((1.0 - u) * (1.0 - u));
    const double denom = a + b;
    return (ap * denom - a * (ap + bp)) / (denom * denom);
}

struct Window {
    double r0 = 0.0, r1 = 0.0;  // flat radius, support radius; r1 <= 0 => w == 1
    double value(double xi) const {
        if (r1 <= 0.0) return 1.0;
        return smoothstep((r1 - std::abs(xi)) / (r1 - r0));
    }
    double derivative(double xi) const {
        if (r1 <= 0.0) return 0.0;
        const double u = (r1 - std::abs(xi)) / (r1 - r0);
        const double sign = (xi >= 0.0) ? 1.0 : -1.0;
        return smoothstep_derivative(u) * (-sign / (r1 - r0));
    }
};

// Hurwitz-style remainders sum_{i>N} i^{-q} via direct summation plus a
// midpoint-rule integral tail; accurate far beyond the 1% reporting needs.
double power_tail(int n_from_exclusive, double q) {
    double acc = 0.0;
    const int cutoff = std::max(n_from_exclusive + 1, 200000);
    for (int i = n_from_exclusive + 1; i <= cutoff; ++i)
        acc += std::pow(static_cast<double>(i), -q);
    const double m = cutoff + 0.5;
    acc += std::pow(m, 1.0 - q) / (q - 1.0);
    return acc;
}

}  // namespace

double multiplier_norm_bound(const RealField& e, const RealField& e_prime) {
    const double se = sup_norm(e);
    const double sp = sup_norm(e_prime);
    return std::sqrt(2.0) * std::sqrt(se * se + sp * sp);
}

NoiseModel build_noise_basis(const NoiseFamilySpec& family, int n_modes,
                             const GridPtr& grid) {
    if (n_modes < 0) throw std::invalid_argument("mode count must be >= 0");

    NoiseModel model;
    model.grid = grid;
    const double L = grid->half_length();

    switch (family.kind) {
        case NoiseFamilyKind::off:
            break;
        case NoiseFamilyKind::trig: {
            if (n_modes > 0 && family.p <= 1.5)
                throw AssumptionViolation(
                    "trig noise family with p <= 3/2 has a divergent "
                    "sum of squared W^{1,inf} norms (the (e^i)' term); "
                    "the noise-basis summability assumption fails");
            Window w;
            if (family.window_fraction > 0.0) {
                w.r1 = family.window_fraction * L;
                w.r0 = 0.75 * w.r1;
            }
            for (int i = 1; i <= n_modes; ++i) {
                const double ci = family.c / std::pow(static_cast<double>(i), family.p);
                const double ki = i * M_PI / L;
                RealField e = sample_field(grid, [&](double xi) {
                    return ci * w.value(xi) * std::cos(ki * xi);
                });
                RealField ep = sample_field(grid, [&](double xi) {
                    return ci * (w.derivative(xi) * std::cos(ki * xi) -
                                 w.value(xi) * ki * std::sin(ki * xi));
                });
                model.modes.push_back(std::move(e));
                model.mode_derivatives.push_back(std::move(ep));
            }
            // Closed-form tail for the unwindowed family; with a window the
            // same expression is reported (the window only shrinks sup norms
            // in the oscillatory term and adds a fixed |w'| contribution, so
            // this is the family's declared envelope, exact for w == 1).
            const double c2 = family.c * family.c;
            model.declared_tail =
                c2 * (power_tail(n_modes, 2.0 * family.p) +
                      (M_PI / L) * (M_PI / L) * power_tail(n_modes, 2.0 * family.p - 2.0));
            model.has_closed_form_tail = true;
            break;
        }
        case NoiseFamilyKind::gaussian: {
            if (n_modes > 0 && family.p <= 0.5)
                throw AssumptionViolation(
                    "gaussian noise family with p <= 1/2 has a divergent "
                    "sum of squared sup norms; the noise-basis summability "
                    "assumption fails");
            const double sigma = family.width;
            if (!(sigma > 0.0))
                throw std::invalid_argument("gaussian family needs width > 0");
            const double golden = 0.6180339887498949;
            for (int i = 1; i <= n_modes; ++i) {
                const double ci = family.c / std::pow(static_cast<double>(i), family.p);
                const double center =
                    -0.5 * L + std::fmod(golden * i, 1.0) * L;  // middle half
                RealField e = sample_field(grid, [&](double xi) {
                    const double u = (xi - center) / sigma;
                    return ci * std::exp(-0.5 * u * u);
                });
                RealField ep = sample_field(grid, [&](double xi) {
                    const double u = (xi - center) / sigma;
                    return -ci * u / sigma * std::exp(-0.5 * u * u);
                });
                model.modes.push_back(std::move(e));
                model.mode_derivatives.push_back(std::move(ep));
            }
            const double c2 = family.c * family.c;
            const double deriv_sup = std::exp(-0.5) / sigma;  // of the unit bump
            model.declared_tail = c2 * (1.0 + deriv_sup * deriv_sup) *
                                  power_tail(n_modes, 2.0 * family.p);
            model.has_closed_form_tail = true;
            break;
        }
        case NoiseFamilyKind::tabulated: {
            if (static_cast<int>(family.tabulated_modes.size()) < n_modes)
                throw std::invalid_argument("tabulated family has too few modes");
            for (int i = 0; i < n_modes; ++i) {
                RealField e(grid, family.tabulated_modes[static_cast<size_t>(i)]);
                model.mode_derivatives.push_back(derivative(e, 1));
                model.modes.push_back(std::move(e));
            }
            model.has_closed_form_tail = false;
            break;
        }
    }

    for (int i = 0; i < model.n_modes(); ++i) {
        model.mode_sup.push_back(sup_norm(model.modes[static_cast<size_t>(i)]));
        model.mode_deriv_sup.push_back(
            sup_norm(model.mode_derivatives[static_cast<size_t>(i)]));
        model.multiplier_bounds.push_back(
            multiplier_norm_bound(model.modes[static_cast<size_t>(i)],
                                  model.mode_derivatives[static_cast<size_t>(i)]));
        model.summability_partial +=
            model.mode_sup.back() * model.mode_sup.back() +
            model.mode_deriv_sup.back() * model.mode_deriv_sup.back();
    }

    if (family.has_drift) {
        if (family.drift_values.empty()) {
            model.drift = sample_field(grid, [&](double) { return family.drift_constant; });
            model.drift_derivative = RealField(grid);
        } else {
            model.drift = RealField(grid, family.drift_values);
            model.drift_derivative = derivative(model.drift, 1);
        }
    } else {
        model.drift = RealField(grid);
        model.drift_derivative = RealField(grid);
    }
    model.drift_multiplier_bound =
        multiplier_norm_bound(model.drift, model.drift_derivative);
    return model;
}

// ---------------------------------------------------------------------------
// Multiplier norms
// ---------------------------------------------------------------------------

double multiplier_norm_empirical(const RealField& e,
                                 const std::vector<RealField>& probes) {
    double best = 0.0;
    for (const auto& g : probes) {
        const double hm1 = sobolev_norm(g, -1.0);
        const double h1 = sobolev_norm(g, 1.0);
        if (hm1 == 0.0 || h1 == 0.0) {
            std::cerr << "multiplier_norm_empirical: skipping zero probe\n";
            continue;
        }
        const RealField eg = pointwise_product(e, g);
        best = std::max(best, sobolev_norm(eg, -1.0) / hm1);
        best = std::max(best, sobolev_norm(eg, 1.0) / h1);
    }
    return best;
}

std::vector<RealField> make_probes(const GridPtr& grid, int count,
                                   std::uint64_t seed) {
    std::vector<RealField> probes;
    probes.reserve(static_cast<size_t>(count));
    const int n = grid->n_points();
    const int band = std::max(2, n / 8);
    NormalStream stream(derive_seed(seed, 0xB0BE5));
    const int n_gaussians = std::min(4, count / 4);
    for (int idx = 0; idx < count - n_gaussians; ++idx) {
        Spectrum spec(static_cast<size_t>(n / 2 + 1), 0.0);
        for (int m = 0; m <= band; ++m)
            spec[static_cast<size_t>(m)] =
                std::complex<double>(stream.next(), m == 0 ? 0.0 : stream.next());
        probes.push_back(inverse_fft(grid, spec));
    }
    for (int gi = 0; gi < n_gaussians; ++gi) {
        const double width = grid->half_length() * 0.08 * (gi + 1);
        probes.push_back(sample_field(grid, [&](double xi) {
            return std::exp(-0.5 * xi * xi / (width * width));
        }));
    }
    return probes;
}

// ---------------------------------------------------------------------------
// Ito machinery
// ---------------------------------------------------------------------------

RealField noise_increment(const RealField& z, const NoiseModel& noise,
                          const BrownianIncrements& incs, int step) {
    check_same_grid(z, noise.drift);
    if (step < 0 || step >= incs.n_steps())
        throw std::out_of_range("noise_increment: step out of range");
    RealField out(z.grid);
    for (int i = 0; i < noise.n_modes(); ++i) {
        const double dw = incs.increment(i + 1, step);
        const RealField& e = noise.modes[static_cast<size_t>(i)];
        for (int j = 0; j < z.size(); ++j) out[j] += e[j] * z[j] * dw;
    }
    const double dt = incs.dt();
    for (int j = 0; j < z.size(); ++j) out[j] += noise.drift[j] * z[j] * dt;
    return out;
}

std::vector<double> ito_integral(const std::vector<RealField>& z_path,
                                 const NoiseModel& noise,
                                 const BrownianIncrements& incs,
                                 SpatialQuadrature quad, DriftTerm drift) {
    const int n_steps = incs.n_steps();
    if (static_cast<int>(z_path.size()) < n_steps)
        throw std::invalid_argument("ito_integral: path shorter than increments");
    const double q = (quad == SpatialQuadrature::density)
                         ? noise.grid->dx()
                         : 1.0;
    std::vector<double> path(static_cast<size_t>(n_steps) + 1, 0.0);
    for (int s = 0; s < n_steps; ++s) {
        const RealField& z = z_path[static_cast<size_t>(s)];
        double inc = 0.0;
        for (int i = 0; i < noise.n_modes(); ++i) {
            double spatial = 0.0;
            const RealField& e = noise.modes[static_cast<size_t>(i)];
            for (int j = 0; j < z.size(); ++j) spatial += e[j] * z[j];
            inc += spatial * q * incs.increment(i + 1, s);
        }
        if (drift == DriftTerm::include) {
            double spatial = 0.0;
            for (int j = 0; j < z.size(); ++j) spatial += noise.drift[j] * z[j];
            inc += spatial * q * incs.dt();
        }
        path[static_cast<size_t>(s) + 1] = path[static_cast<size_t>(s)] + inc;
    }
    return path;
}

}  // namespace spde
