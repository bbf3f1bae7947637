#pragma once

#include <complex>
#include <vector>

#include "spde/grid.hpp"

namespace spde {

/// Half spectrum of a real field (bins m = 0..n/2), unnormalized DFT
/// coefficients F_m = sum_j f_j exp(-2 pi i j m / n).
using Spectrum = std::vector<std::complex<double>>;

Spectrum forward_fft(const RealField& f);
/// Inverse of forward_fft (applies the 1/n normalization).
RealField inverse_fft(const GridPtr& grid, const Spectrum& spec);

/// (I - Laplacian)^{s/2} as the Fourier multiplier (1 + k^2)^{s/2}.
RealField bessel_potential(const RealField& f, double s);

/// ||f||_{H^s} = ||(I-Laplacian)^{s/2} f||_{L^2}, evaluated in spectral space.
double sobolev_norm(const RealField& f, double s);

/// <f, g>_{H^-1} = <f, (I-Laplacian)^{-1} g>_{L^2}.
double h_minus1_inner(const RealField& f, const RealField& g);

/// Spectral derivative of order 1 or 2. The Nyquist bin is zeroed for the
/// odd-order derivative.
RealField derivative(const RealField& f, int order);

/// Zero every bin with |m| > n/3 (two-thirds dealiasing rule).
void dealias_top_third(Spectrum& spec, const Grid1D& grid);

}  // namespace spde
