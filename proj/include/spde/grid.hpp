#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace spde {

/// Uniform periodic grid on [-L, L) with power-of-two resolution.
///
/// Node j sits at xi_j = -L + j*dx, dx = 2L/n. The wavenumber array follows
/// the standard DFT layout k = (pi/L) * {0, 1, ..., n/2-1, -n/2, ..., -1}.
class Grid1D {
public:
    Grid1D(double half_length, int n_points);

    double half_length() const noexcept { return half_length_; }
    int n_points() const noexcept { return n_; }
    double dx() const noexcept { return dx_; }
    double node(int j) const noexcept { return -half_length_ + dx_ * j; }

    /// Wavenumbers in DFT layout, length n_points.
    std::span<const double> wavenumbers() const noexcept { return wavenumbers_; }
    /// |k| for the half-spectrum bin m in [0, n/2].
    double abs_wavenumber(int m) const noexcept {
        return M_PI * static_cast<double>(m) / half_length_;
    }

    bool compatible(const Grid1D& other) const noexcept {
        return n_ == other.n_ && half_length_ == other.half_length_;
    }

private:
    double half_length_;
    int n_;
    double dx_;
    std::vector<double> wavenumbers_;
};

using GridPtr = std::shared_ptr<const Grid1D>;

GridPtr make_grid(double half_length, int n_points);

/// Real-valued function sampled at the grid nodes.
struct RealField {
    GridPtr grid;
    std::vector<double> values;

    RealField() = default;
    explicit RealField(GridPtr g) : grid(std::move(g)), values(grid->n_points(), 0.0) {}
    RealField(GridPtr g, std::vector<double> v);

    int size() const noexcept { return static_cast<int>(values.size()); }
    double& operator[](int j) noexcept { return values[static_cast<size_t>(j)]; }
    double operator[](int j) const noexcept { return values[static_cast<size_t>(j)]; }

    bool all_finite() const noexcept;
};

/// Sample a callable f(xi) onto the grid.
template <typename F>
RealField sample_field(const GridPtr& grid, F&& f) {
    RealField out(grid);
    for (int j = 0; j < grid->n_points(); ++j) out[j] = f(grid->node(j));
    return out;
}

void check_same_grid(const RealField& a, const RealField& b);

// Small field algebra used throughout the solvers and the energy harness.
RealField operator+(const RealField& a, const RealField& b);
RealField operator-(const RealField& a, const RealField& b);
RealField operator*(double s, const RealField& a);
RealField pointwise_product(const RealField& a, const RealField& b);
void axpy(double s, const RealField& x, RealField& y);  // y += s*x

/// Discrete mass sum(values)*dx.
double mass(const RealField& f);
/// sup over grid nodes (a discretization of the true L^inf norm).
double sup_norm(const RealField& f);
/// Quadrature inner product sum(f*g)*dx.
double l2_inner(const RealField& f, const RealField& g);
double l2_norm(const RealField& f);
/// max |f| over the outer 10% of the domain (|xi| >= 0.9 L); used to audit
/// how much of a field has reached the torus boundary.
double boundary_leakage(const RealField& f);

}  // namespace spde
