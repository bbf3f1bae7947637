#include "spde/trajectory.hpp"

namespace spde {

double Trajectory::l2_time_integral() const {
    double acc = 0.0;
    for (int j = 0; j + 1 < n_snapshots(); ++j) {
        const double window = dt_ * (step_of(j + 1) - step_of(j));
        const RealField& z = snapshot(j);
        double norm2 = 0.0;
        for (double v : z.values) norm2 += v * v;
        acc += window * norm2 * grid_->dx();
    }
    return acc;
}

}  // namespace spde
