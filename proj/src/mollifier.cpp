#include "spde/mollifier.hpp"

#include <cmath>
#include <stdexcept>

#include "spde/spectral.hpp"

namespace spde {

double bump_profile(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - u * u));
}

MollifierSpec make_mollifier(const GridPtr& grid, double epsilon) {
    if (!(epsilon > 0.0))
        throw std::invalid_argument("mollifier width must be positive");
    if (!(epsilon < 0.5 * grid->half_length()))
        throw std::invalid_argument("mollifier support does not fit inside the grid");

    MollifierSpec spec;
    spec.epsilon = epsilon;
    spec.kernel = RealField(grid);
    const int n = grid->n_points();
    // Node 0 holds the kernel center; negative offsets wrap to the top half.
    for (int j = 0; j < n; ++j) {
        const int m = (j < n / 2) ? j : j - n;
        const double x = m * grid->dx();
        spec.kernel[j] = bump_profile(x / epsilon) / epsilon;
    }
    const double discrete_mass = mass(spec.kernel);
    if (!(discrete_mass > 0.0))
        throw std::invalid_argument("mollifier width is below grid resolution");
    for (double& v : spec.kernel.values) v /= discrete_mass;
    return spec;
}

RealField mollify(const RealField& f, const MollifierSpec& m) {
    check_same_grid(f, m.kernel);
    Spectrum fs = forward_fft(f);
    const Spectrum ks = forward_fft(m.kernel);
    const double dx = f.grid->dx();
    for (size_t i = 0; i < fs.size(); ++i) fs[i] *= ks[i] * dx;
    return inverse_fft(f.grid, fs);
}

}  // namespace spde
