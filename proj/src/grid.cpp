#include "spde/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace spde {

namespace {
bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

Grid1D::Grid1D(double half_length, int n_points)
    : half_length_(half_length), n_(n_points) {
    if (!(half_length > 0.0))
        throw std::invalid_argument("grid half-length must be positive");
    if (n_points < 8 || !is_power_of_two(n_points))
        throw std::invalid_argument("grid size must be a power of two >= 8");
    dx_ = 2.0 * half_length_ / static_cast<double>(n_);
    wavenumbers_.resize(static_cast<size_t>(n_));
    const double k0 = M_PI / half_length_;
    for (int j = 0; j < n_; ++j) {
        const int m = (j < n_ / 2) ? j : j - n_;
        wavenumbers_[static_cast<size_t>(j)] = k0 * static_cast<double>(m);
    }
}

GridPtr make_grid(double half_length, int n_points) {
    return std::make_shared<const Grid1D>(half_length, n_points);
}

RealField::RealField(GridPtr g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid->n_points())
        throw std::invalid_argument("field length does not match grid");
}

bool RealField::all_finite() const noexcept {
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

void check_same_grid(const RealField& a, const RealField& b) {
    if (!a.grid || !b.grid || !a.grid->compatible(*b.grid))
        throw std::invalid_argument("fields live on different grids");
}

RealField operator+(const RealField& a, const RealField& b) {
    check_same_grid(a, b);
    RealField out(a.grid);
    for (int j = 0; j < a.size(); ++j) out[j] = a[j] + b[j];
    return out;
}

RealField operator-(const RealField& a, const RealField& b) {
    check_same_grid(a, b);
    RealField out(a.grid);
    for (int j = 0; j < a.size(); ++j) out[j] = a[j] - b[j];
    return out;
}

RealField operator*(double s, const RealField& a) {
    RealField out(a.grid);
    for (int j = 0; j < a.size(); ++j) out[j] = s * a[j];
    return out;
}

RealField pointwise_product(const RealField& a, const RealField& b) {
    check_same_grid(a, b);
    RealField out(a.grid);
    for (int j = 0; j < a.size(); ++j) out[j] = a[j] * b[j];
    return out;
}

void axpy(double s, const RealField& x, RealField& y) {
    check_same_grid(x, y);
    for (int j = 0; j < x.size(); ++j) y[j] += s * x[j];
}

double mass(const RealField& f) {
    double acc = 0.0;
    for (double v : f.values) acc += v;
    return acc * f.grid->dx();
}

double sup_norm(const RealField& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

double l2_inner(const RealField& f, const RealField& g) {
    check_same_grid(f, g);
    double acc = 0.0;
    for (int j = 0; j < f.size(); ++j) acc += f[j] * g[j];
    return acc * f.grid->dx();
}

double l2_norm(const RealField& f) { return std::sqrt(l2_inner(f, f)); }

double boundary_leakage(const RealField& f) {
    const double cutoff = 0.9 * f.grid->half_length();
    double m = 0.0;
    for (int j = 0; j < f.size(); ++j)
        if (std::abs(f.grid->node(j)) >= cutoff) m = std::max(m, std::abs(f[j]));
    return m;
}

}  // namespace spde
