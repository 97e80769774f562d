#pragma once

#include <cstddef>
#include <span>

#include "mixsdde/grid_path.hpp"

namespace mixsdde {

// Non-owning window view psi(u) = xi(t + u), u in [-r, 0], of a grid path.
// The window is grid-aligned: r = steps * dt and t is a node.
class Segment {
public:
    Segment(const GridPath& path, std::size_t anchor_index, std::size_t window_steps);

    double anchor_time() const noexcept { return path_->time(anchor_); }
    double delay() const noexcept { return static_cast<double>(steps_) * path_->dt(); }
    std::size_t steps() const noexcept { return steps_; }
    std::size_t dim() const noexcept { return path_->dim(); }
    double dt() const noexcept { return path_->dt(); }

    // psi(-lag * dt).
    std::span<const double> at_lag(std::size_t lag) const noexcept { return path_->point(anchor_ - lag); }
    std::span<const double> now() const noexcept { return at_lag(0); }

    // psi(u) for u in [-r, 0], linearly interpolated between nodes.
    double operator()(double u, std::size_t j = 0) const;

    // Lag (in steps) of the node at -tau; throws unless tau is a grid multiple
    // inside the window.
    std::size_t lag_of(double tau) const;

    // ||psi||_C, the maximum Euclidean norm over the window.
    double sup_norm() const;

    // Copy of the window as a path on [-r, 0].
    GridPath to_path() const;

private:
    const GridPath* path_;
    std::size_t anchor_;
    std::size_t steps_;
};

// Segment of `path` at time t with window length r. Both must be grid-aligned.
Segment segment_at(const GridPath& path, double t, double r);

// Number of grid steps in a length, rejecting lengths that are not multiples of dt.
std::size_t steps_of(double length, double dt, const char* what);

}  // namespace mixsdde
