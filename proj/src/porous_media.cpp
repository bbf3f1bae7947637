#include "spde/porous_media.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "spde/errors.hpp"
#include "spde/spectral.hpp"

namespace spde {

void check_pme_stability(double dt, double dx, double lipschitz, Scheme scheme) {
    if (lipschitz <= 0.0) return;
    const double window = (scheme == Scheme::explicit_em)
                              ? dx * dx / (2.0 * lipschitz)
                              : dx * dx / lipschitz;
    if (dt > window * (1.0 + 1e-12))
        throw std::invalid_argument(
            "time step violates the stability rule: dt = " + std::to_string(dt) +
            " > " + std::to_string(window));
}

namespace {

RealField explicit_pme_step(const RealField& x, const Nonlinearity& psi,
                            const NoiseModel& noise,
                            const BrownianIncrements& incs, int step, double dt,
                            bool dealias) {
    Spectrum spec = forward_fft(psi.apply(x));
    if (dealias) dealias_top_third(spec, *x.grid);
    const int n = x.size();
    for (int m = 0; m <= n / 2; ++m) {
        const double k = x.grid->abs_wavenumber(m);
        spec[static_cast<size_t>(m)] *= -k * k;
    }
    RealField out = inverse_fft(x.grid, spec);
    const double half_dt = 0.5 * dt;
    for (int j = 0; j < n; ++j) out[j] = x[j] + half_dt * out[j];
    axpy(1.0, noise_increment(x, noise, incs, step), out);
    return out;
}

RealField semi_implicit_pme_step(const RealField& x, const Nonlinearity& psi,
                                 const NoiseModel& noise,
                                 const BrownianIncrements& incs, int step,
                                 double dt, bool dealias) {
    // Linearization slope Lip/2 treated by Crank-Nicolson inside the 1/2
    // Laplacian; the nonlinear remainder stays explicit.
    const double abar = 0.5 * psi.lipschitz;
    Spectrum fx = forward_fft(x);
    Spectrum fpsi = forward_fft(psi.apply(x));
    if (dealias) dealias_top_third(fpsi, *x.grid);
    const Spectrum fnoise = forward_fft(noise_increment(x, noise, incs, step));
    const int n = x.size();
    Spectrum out(fx.size());
    for (int m = 0; m <= n / 2; ++m) {
        const double k2 = std::pow(x.grid->abs_wavenumber(m), 2);
        const auto i = static_cast<size_t>(m);
        const std::complex<double> numerator =
            (1.0 - 0.25 * dt * abar * k2) * fx[i] -
            0.5 * dt * k2 * (fpsi[i] - abar * fx[i]) + fnoise[i];
        out[i] = numerator / (1.0 + 0.25 * dt * abar * k2);
    }
    return inverse_fft(x.grid, out);
}

}  // namespace

RealField step_pme(const RealField& x, int step, const Nonlinearity& psi,
                   const NoiseModel& noise, const BrownianIncrements& incs,
                   double dt, const SolveOptions& opts) {
    check_pme_stability(dt, x.grid->dx(), psi.lipschitz, opts.scheme);
    RealField out = (opts.scheme == Scheme::explicit_em)
                        ? explicit_pme_step(x, psi, noise, incs, step, dt,
                                            opts.dealias)
                        : semi_implicit_pme_step(x, psi, noise, incs, step, dt,
                                                 opts.dealias);
    if (!out.all_finite())
        throw BlowUpError(step, "porous-media state left the finite range at step " +
                                    std::to_string(step));
    return out;
}

Trajectory solve_pme(const RealField& x0, const Nonlinearity& psi,
                     const NoiseModel& noise, const BrownianIncrements& incs,
                     int n_steps, double dt, const SolveOptions& opts) {
    check_pme_stability(dt, x0.grid->dx(), psi.lipschitz, opts.scheme);
    if (n_steps > incs.n_steps())
        throw std::invalid_argument("not enough Wiener increments for the run");
    if (opts.stride < 1) throw std::invalid_argument("stride must be >= 1");
    if (!x0.all_finite())
        throw std::invalid_argument("initial condition is not finite");

    Trajectory traj(x0.grid, dt, opts.stride, n_steps);
    RealField x = x0;
    traj.record(x);
    for (int s = 0; s < n_steps; ++s) {
        x = step_pme(x, s, psi, noise, incs, dt, opts);
        if ((s + 1) % opts.stride == 0) traj.record(x);
    }
    return traj;
}

std::vector<double> weak_form_residual_pme(const Trajectory& traj,
                                           const Nonlinearity& psi,
                                           const NoiseModel& noise,
                                           const BrownianIncrements& incs,
                                           const RealField& phi) {
    check_same_grid(traj.front(), phi);
    if (boundary_leakage(phi) > 1e-12 * (1.0 + sup_norm(phi)))
        std::cerr << "weak_form_residual: test function touches the boundary zone\n";

    const RealField phi_xx = derivative(phi, 2);
    const double dt = traj.dt();
    std::vector<double> residual(static_cast<size_t>(traj.n_snapshots()), 0.0);
    const double initial = l2_inner(phi, traj.front());

    double drift_acc = 0.0;
    double noise_acc = 0.0;
    residual[0] = 0.0;
    for (int j = 0; j + 1 < traj.n_snapshots(); ++j) {
        const RealField& x = traj.snapshot(j);
        const int step_lo = traj.step_of(j);
        const int step_hi = traj.step_of(j + 1);
        drift_acc += 0.5 * dt * (step_hi - step_lo) *
                     l2_inner(psi.apply(x), phi_xx);

        const RealField phi_x = pointwise_product(phi, x);
        const double drift_pairing = l2_inner(noise.drift, phi_x);
        for (int u = step_lo; u < step_hi; ++u) {
            for (int i = 0; i < noise.n_modes(); ++i)
                noise_acc += l2_inner(noise.modes[static_cast<size_t>(i)], phi_x) *
                             incs.increment(i + 1, u);
            noise_acc += drift_pairing * dt;
        }
        residual[static_cast<size_t>(j) + 1] =
            l2_inner(phi, traj.snapshot(j + 1)) - initial - drift_acc - noise_acc;
    }
    return residual;
}

}  // namespace spde
