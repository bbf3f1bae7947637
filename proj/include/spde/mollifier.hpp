#pragma once

#include "spde/grid.hpp"

namespace spde {

/// Compactly supported unit-mass kernel phi_eps = (1/eps) phi(./eps), with
/// phi the standard bump exp(-1/(1-u^2)) on (-1,1). The sampled kernel is
/// renormalized so its discrete mass is exactly 1.
struct MollifierSpec {
    double epsilon = 0.0;
    RealField kernel;  // centered at node 0 (periodic layout), unit discrete mass
};

/// Build the kernel for width eps on the given grid. Requires eps < L/2 so
/// the support fits inside the torus.
MollifierSpec make_mollifier(const GridPtr& grid, double epsilon);

/// Periodic convolution f * phi_eps (dx-weighted, evaluated spectrally).
RealField mollify(const RealField& f, const MollifierSpec& m);

/// Unnormalized bump profile exp(-1/(1-u^2)) on (-1,1), 0 outside.
double bump_profile(double u);

}  // namespace spde
