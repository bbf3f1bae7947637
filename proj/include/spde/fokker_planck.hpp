#pragma once

#include "spde/coefficients.hpp"
#include "spde/grid.hpp"
#include "spde/noise.hpp"
#include "spde/trajectory.hpp"

namespace spde {

enum class Scheme { explicit_em, semi_implicit };

struct SolveOptions {
    Scheme scheme = Scheme::explicit_em;
    bool dealias = false;
    int stride = 1;
};

/// Explicit gate dt <= dx^2/(4 ||a||inf); the semi-implicit variant treats a
/// frozen mean coefficient by Crank-Nicolson and only the remainder
/// explicitly, which doubles the admissible window to dx^2/(2 ||a||inf).
void check_fp_stability(double dt, double dx, double sup_a, Scheme scheme);

/// One Euler-Maruyama step of dz = d^2/dxi^2 (a z) dt + z dmu.
RealField step_fp(const RealField& z, int step, const DiffusionCoefficient& a,
                  const NoiseModel& noise, const BrownianIncrements& incs,
                  double dt, const SolveOptions& opts = {});

Trajectory solve_fp(const RealField& x0, const DiffusionCoefficient& a,
                    const NoiseModel& noise, const BrownianIncrements& incs,
                    int n_steps, double dt, const SolveOptions& opts = {});

/// Pathwise defect of the distributional identity: for each snapshot t,
///   <phi, z(t)> - <phi, x0> - int_0^t <a phi'', z> ds - ito-term,
/// with all time integrals left-point on the recorded schedule and the noise
/// term consuming the underlying increments (field frozen at the left
/// snapshot). Warns if the test function touches the boundary zone.
std::vector<double> weak_form_residual_fp(const Trajectory& traj,
                                          const DiffusionCoefficient& a,
                                          const NoiseModel& noise,
                                          const BrownianIncrements& incs,
                                          const RealField& phi);

}  // namespace spde
