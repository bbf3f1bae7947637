#include "spde/fokker_planck.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "spde/errors.hpp"
#include "spde/spectral.hpp"

namespace spde {

void check_fp_stability(double dt, double dx, double sup_a, Scheme scheme) {
    if (sup_a <= 0.0) return;
    const double window = (scheme == Scheme::explicit_em)
                              ? dx * dx / (4.0 * sup_a)
                              : dx * dx / (2.0 * sup_a);
    if (dt > window * (1.0 + 1e-12))
        throw std::invalid_argument(
            "time step violates the stability rule: dt = " + std::to_string(dt) +
            " > " + std::to_string(window));
}

namespace {

RealField explicit_fp_step(const RealField& z, const RealField& a_field,
                           const NoiseModel& noise,
                           const BrownianIncrements& incs, int step, double dt,
                           bool dealias) {
    Spectrum spec = forward_fft(pointwise_product(a_field, z));
    if (dealias) dealias_top_third(spec, *z.grid);
    const int n = z.size();
    for (int m = 0; m <= n / 2; ++m) {
        const double k = z.grid->abs_wavenumber(m);
        spec[static_cast<size_t>(m)] *= -k * k;
    }
    RealField out = inverse_fft(z.grid, spec);
    for (int j = 0; j < n; ++j) out[j] = z[j] + dt * out[j];
    axpy(1.0, noise_increment(z, noise, incs, step), out);
    return out;
}

RealField semi_implicit_fp_step(const RealField& z, const RealField& a_field,
                                const NoiseModel& noise,
                                const BrownianIncrements& incs, int step,
                                double dt, bool dealias) {
    // Crank-Nicolson on the frozen mean coefficient, explicit remainder.
    double amin = a_field[0], amax = a_field[0];
    for (double v : a_field.values) {
        amin = std::min(amin, v);
        amax = std::max(amax, v);
    }
    const double abar = 0.5 * (amin + amax);

    Spectrum fz = forward_fft(z);
    Spectrum faz = forward_fft(pointwise_product(a_field, z));
    if (dealias) dealias_top_third(faz, *z.grid);
    const Spectrum fnoise = forward_fft(noise_increment(z, noise, incs, step));
    const int n = z.size();
    Spectrum out(fz.size());
    for (int m = 0; m <= n / 2; ++m) {
        const double k2 = std::pow(z.grid->abs_wavenumber(m), 2);
        const auto i = static_cast<size_t>(m);
        const std::complex<double> numerator =
            (1.0 - 0.5 * dt * abar * k2) * fz[i] -
            dt * k2 * (faz[i] - abar * fz[i]) + fnoise[i];
        out[i] = numerator / (1.0 + 0.5 * dt * abar * k2);
    }
    return inverse_fft(z.grid, out);
}

}  // namespace

RealField step_fp(const RealField& z, int step, const DiffusionCoefficient& a,
                  const NoiseModel& noise, const BrownianIncrements& incs,
                  double dt, const SolveOptions& opts) {
    check_fp_stability(dt, z.grid->dx(), a.sup_bound(), opts.scheme);
    const IncrementsPrefix history(incs, step);
    const RealField a_field = a.at(step, z.grid, history);
    RealField out = (opts.scheme == Scheme::explicit_em)
                        ? explicit_fp_step(z, a_field, noise, incs, step, dt,
                                           opts.dealias)
                        : semi_implicit_fp_step(z, a_field, noise, incs, step,
                                                dt, opts.dealias);
    if (!out.all_finite())
        throw BlowUpError(step, "Fokker-Planck state left the finite range at step " +
                                    std::to_string(step));
    return out;
}

Trajectory solve_fp(const RealField& x0, const DiffusionCoefficient& a,
                    const NoiseModel& noise, const BrownianIncrements& incs,
                    int n_steps, double dt, const SolveOptions& opts) {
    check_fp_stability(dt, x0.grid->dx(), a.sup_bound(), opts.scheme);
    if (n_steps > incs.n_steps())
        throw std::invalid_argument("not enough Wiener increments for the run");
    if (opts.stride < 1) throw std::invalid_argument("stride must be >= 1");
    if (!x0.all_finite())
        throw std::invalid_argument("initial condition is not finite");

    Trajectory traj(x0.grid, dt, opts.stride, n_steps);
    RealField z = x0;
    traj.record(z);
    for (int s = 0; s < n_steps; ++s) {
        z = step_fp(z, s, a, noise, incs, dt, opts);
        if ((s + 1) % opts.stride == 0) traj.record(z);
    }
    return traj;
}

std::vector<double> weak_form_residual_fp(const Trajectory& traj,
                                          const DiffusionCoefficient& a,
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
    residual[0] = l2_inner(phi, traj.front()) - initial;
    for (int j = 0; j + 1 < traj.n_snapshots(); ++j) {
        const RealField& z = traj.snapshot(j);
        const int step_lo = traj.step_of(j);
        const int step_hi = traj.step_of(j + 1);
        const IncrementsPrefix history(incs, step_lo);
        const RealField a_field = a.at(step_lo, traj.grid(), history);
        drift_acc += dt * (step_hi - step_lo) *
                     l2_inner(pointwise_product(a_field, phi_xx), z);

        const RealField phi_z = pointwise_product(phi, z);
        double drift_pairing = l2_inner(noise.drift, phi_z);
        for (int u = step_lo; u < step_hi; ++u) {
            for (int i = 0; i < noise.n_modes(); ++i)
                noise_acc += l2_inner(noise.modes[static_cast<size_t>(i)], phi_z) *
                             incs.increment(i + 1, u);
            noise_acc += drift_pairing * dt;
        }
        residual[static_cast<size_t>(j) + 1] =
            l2_inner(phi, traj.snapshot(j + 1)) - initial - drift_acc - noise_acc;
    }
    return residual;
}

}  // namespace spde
