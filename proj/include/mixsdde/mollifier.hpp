#pragma once

#include <cstddef>
#include <span>

#include "mixsdde/grid_path.hpp"

namespace mixsdde::solver {

// h_N(x) = x for |x| <= N, N x / |x| otherwise (Euclidean norm), in place.
void clamp_to_ball(std::span<double> x, double radius) noexcept;

// Window start (t_k - 1/N) v 0 as a node j <= k plus a fraction of the next cell;
// window_steps = 1/(N dt).
struct WindowStart {
    std::size_t node = 0;
    double fraction = 0.0;
};
WindowStart window_start(std::size_t k, double window_steps) noexcept;

struct MollifiedDriver {
    GridPath path;  // Z^N(t) = N int_{(t-1/N) v 0}^t h_N(Z(s)) ds
    GridPath rate;  // dZ^N/dt = N (h_N(Z(t)) - h_N(Z((t-1/N) v 0)))
};

// Windowed average of the clamped driver, integrating the piecewise-linear
// interpolant of the clamped node values exactly. Requires dt <= 1/(4N).
MollifiedDriver mollify_driver(const GridPath& driver, std::size_t level);

// Rate dZ^N/dt at node k using only nodes 0..k (the value at the window start
// is interpolated between clamped nodes). `clamped` holds h_N of the driver.
void mollified_rate_at(const GridPath& clamped, std::size_t k, std::size_t level, std::span<double> out);

}  // namespace mixsdde::solver
