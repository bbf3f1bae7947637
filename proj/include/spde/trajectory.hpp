#pragma once

#include <vector>

#include "spde/grid.hpp"

namespace spde {

/// Time-indexed snapshots of a field, recorded every `stride` steps starting
/// at step 0 (floor(n_steps/stride)+1 snapshots in total).
class Trajectory {
public:
    Trajectory(GridPtr grid, double dt, int stride, int n_steps)
        : grid_(std::move(grid)), dt_(dt), stride_(stride), n_steps_(n_steps) {
        snapshots_.reserve(static_cast<size_t>(n_steps / stride) + 1);
    }

    void record(const RealField& f) { snapshots_.push_back(f); }

    const GridPtr& grid() const noexcept { return grid_; }
    double dt() const noexcept { return dt_; }
    int stride() const noexcept { return stride_; }
    int n_steps() const noexcept { return n_steps_; }
    int n_snapshots() const noexcept { return static_cast<int>(snapshots_.size()); }
    /// Solver step index of snapshot j.
    int step_of(int j) const noexcept { return j * stride_; }
    double time_of(int j) const noexcept { return dt_ * step_of(j); }
    const RealField& snapshot(int j) const { return snapshots_[static_cast<size_t>(j)]; }
    const RealField& front() const { return snapshots_.front(); }
    const RealField& back() const { return snapshots_.back(); }

    /// Left-point quadrature of ||z||_{L^2}^2 over the recorded schedule;
    /// the discrete stand-in for the square-integrability condition the
    /// uniqueness class imposes.
    double l2_time_integral() const;

    /// Same recorded times: the products dt*stride must agree (two
    /// trajectories at different resolutions may share a schedule).
    bool same_schedule(const Trajectory& other) const noexcept {
        return dt_ * stride_ == other.dt_ * other.stride_ &&
               n_snapshots() == other.n_snapshots();
    }

private:
    GridPtr grid_;
    double dt_;
    int stride_;
    int n_steps_;
    std::vector<RealField> snapshots_;
};

}  // namespace spde
