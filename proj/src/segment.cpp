#include "mixsdde/segment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mixsdde/errors.hpp"

namespace mixsdde {

std::size_t steps_of(double length, double dt, const char* what) {
    if (length < 0.0) throw DomainError(std::string(what) + " must be non-negative");
    const double q = length / dt;
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-9 * std::max(1.0, q))
        throw DomainError(std::string(what) + " = " + std::to_string(length) + " is not a multiple of the grid step " +
                          std::to_string(dt));
    return static_cast<std::size_t>(r);
}

Segment::Segment(const GridPath& path, std::size_t anchor_index, std::size_t window_steps)
    : path_(&path), anchor_(anchor_index), steps_(window_steps) {
    if (anchor_index >= path.size()) throw DomainError("segment: anchor outside path");
    if (window_steps > anchor_index) throw DomainError("segment: window reaches before the start of the path");
}

double Segment::operator()(double u, std::size_t j) const {
    const double r = delay();
    if (u > 1e-12 * dt() || u < -r - 1e-12 * dt()) throw DomainError("segment: u outside [-r, 0]");
    const double back = std::clamp(-u / dt(), 0.0, static_cast<double>(steps_));
    const double lo = std::floor(back);
    const auto lag = static_cast<std::size_t>(lo);
    const double w = back - lo;
    if (w == 0.0 || lag == steps_) return (*path_)(anchor_ - lag, j);
    return (1.0 - w) * (*path_)(anchor_ - lag, j) + w * (*path_)(anchor_ - lag - 1, j);
}

std::size_t Segment::lag_of(double tau) const {
    const std::size_t lag = steps_of(tau, dt(), "delay tap");
    if (lag > steps_) throw DomainError("segment: delay tap exceeds the window length");
    return lag;
}

double Segment::sup_norm() const {
    double m = 0.0;
    for (std::size_t lag = 0; lag <= steps_; ++lag) m = std::max(m, euclidean_norm(at_lag(lag)));
    return m;
}

GridPath Segment::to_path() const {
    const GridPath w = path_->slice(anchor_ - steps_, steps_ + 1);
    return GridPath(-delay(), w.dt(), w.dim(), {w.data().begin(), w.data().end()});
}

Segment segment_at(const GridPath& path, double t, double r) {
    const std::size_t anchor = path.index_of(t);
    const std::size_t steps = steps_of(r, path.dt(), "segment length r");
    if (steps > anchor) throw DomainError("segment_at: path does not cover [t - r, t]");
    return Segment(path, anchor, steps);
}

}  // namespace mixsdde
