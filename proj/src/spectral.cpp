#include "spde/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace spde {

namespace {

// One r2c/c2r plan pair per grid size, created once behind a mutex (the FFTW
// planner is not thread safe; execution through the new-array interface is).
// Plans are created with FFTW_UNALIGNED so they can run on plain vectors.
struct PlanPair {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

PlanPair& plans_for(int n) {
    static std::mutex mutex;
    static std::map<int, PlanPair> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    std::vector<double> real_buf(static_cast<size_t>(n));
    std::vector<std::complex<double>> cplx_buf(static_cast<size_t>(n / 2 + 1));
    PlanPair p;
    p.forward = fftw_plan_dft_r2c_1d(
        n, real_buf.data(), reinterpret_cast<fftw_complex*>(cplx_buf.data()),
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    p.backward = fftw_plan_dft_c2r_1d(
        n, reinterpret_cast<fftw_complex*>(cplx_buf.data()), real_buf.data(),
        FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (!p.forward || !p.backward)
        throw std::runtime_error("fftw plan creation failed");
    return cache.emplace(n, p).first->second;
}

}  // namespace

Spectrum forward_fft(const RealField& f) {
    const int n = f.size();
    Spectrum out(static_cast<size_t>(n / 2 + 1));
    std::vector<double> in(f.values);  // r2c may scribble on its input
    fftw_execute_dft_r2c(plans_for(n).forward, in.data(),
                         reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

RealField inverse_fft(const GridPtr& grid, const Spectrum& spec) {
    const int n = grid->n_points();
    if (static_cast<int>(spec.size()) != n / 2 + 1)
        throw std::invalid_argument("spectrum length does not match grid");
    Spectrum scratch(spec);  // c2r destroys its input
    RealField out(grid);
    fftw_execute_dft_c2r(plans_for(n).backward,
                         reinterpret_cast<fftw_complex*>(scratch.data()),
                         out.values.data());
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& v : out.values) v *= inv_n;
    return out;
}

RealField bessel_potential(const RealField& f, double s) {
    if (!f.all_finite())
        throw std::invalid_argument("bessel_potential: field is not finite");
    Spectrum spec = forward_fft(f);
    const int n = f.size();
    for (int m = 0; m <= n / 2; ++m) {
        const double k = f.grid->abs_wavenumber(m);
        spec[static_cast<size_t>(m)] *= std::pow(1.0 + k * k, 0.5 * s);
    }
    return inverse_fft(f.grid, spec);
}

double sobolev_norm(const RealField& f, double s) {
    const Spectrum spec = forward_fft(f);
    const int n = f.size();
    double acc = 0.0;
    for (int m = 0; m <= n / 2; ++m) {
        const double k = f.grid->abs_wavenumber(m);
        const double w = (m == 0 || m == n / 2) ? 1.0 : 2.0;  // Hermitian halves
        acc += w * std::pow(1.0 + k * k, s) * std::norm(spec[static_cast<size_t>(m)]);
    }
    return std::sqrt(acc * f.grid->dx() / static_cast<double>(n));
}

double h_minus1_inner(const RealField& f, const RealField& g) {
    check_same_grid(f, g);
    return l2_inner(f, bessel_potential(g, -2.0));
}

RealField derivative(const RealField& f, int order) {
    if (order != 1 && order != 2)
        throw std::invalid_argument("derivative: order must be 1 or 2");
    Spectrum spec = forward_fft(f);
    const int n = f.size();
    for (int m = 0; m <= n / 2; ++m) {
        const double k = f.grid->abs_wavenumber(m);
        if (order == 1) {
            if (m == n / 2) {
                spec[static_cast<size_t>(m)] = 0.0;  // no signed Nyquist mode
            } else {
                spec[static_cast<size_t>(m)] *= std::complex<double>(0.0, k);
            }
        } else {
            spec[static_cast<size_t>(m)] *= -k * k;
        }
    }
    return inverse_fft(f.grid, spec);
}

void dealias_top_third(Spectrum& spec, const Grid1D& grid) {
    const int n = grid.n_points();
    for (int m = n / 3 + 1; m <= n / 2; ++m) spec[static_cast<size_t>(m)] = 0.0;
}

}  // namespace spde
