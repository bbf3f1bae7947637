#pragma once

#include "spde/coefficients.hpp"
#include "spde/fokker_planck.hpp"
#include "spde/grid.hpp"
#include "spde/noise.hpp"
#include "spde/trajectory.hpp"

namespace spde {

/// Explicit gate dt <= dx^2/(2 Lip(psi)) (the drift carries its own 1/2);
/// the semi-implicit variant linearizes around Lip/2 and doubles the window.
void check_pme_stability(double dt, double dx, double lipschitz, Scheme scheme);

/// One step of dX = 1/2 d^2/dxi^2 psi(X) dt + X dmu.
RealField step_pme(const RealField& x, int step, const Nonlinearity& psi,
                   const NoiseModel& noise, const BrownianIncrements& incs,
                   double dt, const SolveOptions& opts = {});

Trajectory solve_pme(const RealField& x0, const Nonlinearity& psi,
                     const NoiseModel& noise, const BrownianIncrements& incs,
                     int n_steps, double dt, const SolveOptions& opts = {});

/// Weak-form defect with the 1/2 psi(X) drift; conventions as the
/// Fokker-Planck version.
std::vector<double> weak_form_residual_pme(const Trajectory& traj,
                                           const Nonlinearity& psi,
                                           const NoiseModel& noise,
                                           const BrownianIncrements& incs,
                                           const RealField& phi);

}  // namespace spde
