#include "mixsdde/grid_path.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mixsdde/errors.hpp"

namespace mixsdde {

GridPath::GridPath(double t0, double dt, std::size_t dim, std::vector<double> values)
    : t0_(t0), dt_(dt), dim_(dim), values_(std::move(values)) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("grid path: dt must be positive and finite");
    if (!std::isfinite(t0)) throw DomainError("grid path: t0 must be finite");
    if (dim == 0) throw DomainError("grid path: dimension must be positive");
    if (values_.empty()) throw DomainError("grid path: values must be non-empty");
    if (values_.size() % dim != 0)
        throw DomainError("grid path: value count " + std::to_string(values_.size()) +
                          " is not a multiple of dimension " + std::to_string(dim));
}

GridPath GridPath::zeros(double t0, double dt, std::size_t n_points, std::size_t dim) {
    return GridPath(t0, dt, dim, std::vector<double>(n_points * dim, 0.0));
}

GridPath GridPath::constant(double t0, double dt, std::size_t n_points, std::span<const double> value) {
    std::vector<double> v;
    v.reserve(n_points * value.size());
    for (std::size_t k = 0; k < n_points; ++k) v.insert(v.end(), value.begin(), value.end());
    return GridPath(t0, dt, value.size(), std::move(v));
}

GridPath GridPath::sample(double t0, double dt, std::size_t n_points, const std::function<double(double)>& f) {
    std::vector<double> v(n_points);
    for (std::size_t k = 0; k < n_points; ++k) v[k] = f(t0 + static_cast<double>(k) * dt);
    return GridPath(t0, dt, 1, std::move(v));
}

std::vector<double> GridPath::component(std::size_t j) const {
    std::vector<double> out(size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = (*this)(k, j);
    return out;
}

std::size_t GridPath::index_of(double t) const {
    const double pos = (t - t0_) / dt_;
    const double k = std::round(pos);
    if (std::abs(pos - k) > 1e-9 || k < 0.0 || k > static_cast<double>(size() - 1))
        throw DomainError("time " + std::to_string(t) + " is not a node of the grid [" + std::to_string(t0_) +
                          ", " + std::to_string(end_time()) + "] with step " + std::to_string(dt_));
    return static_cast<std::size_t>(k);
}

double GridPath::interpolate(double t, std::size_t j) const {
    const double pos = (t - t0_) / dt_;
    const double last = static_cast<double>(size() - 1);
    if (pos < -1e-9 || pos > last + 1e-9) throw DomainError("interpolate: time outside path");
    const double clamped = std::clamp(pos, 0.0, last);
    auto k = static_cast<std::size_t>(std::floor(clamped));
    if (k >= size() - 1) return (*this)(size() - 1, j);
    const double w = clamped - static_cast<double>(k);
    return (1.0 - w) * (*this)(k, j) + w * (*this)(k + 1, j);
}

GridPath GridPath::restrict_to(std::size_t stride) const {
    if (stride == 0) throw DomainError("restrict_to: stride must be positive");
    if (stride == 1) return *this;
    if ((size() - 1) % stride != 0)
        throw DomainError("restrict_to: " + std::to_string(size() - 1) + " steps not divisible by stride " +
                          std::to_string(stride));
    const std::size_t n = (size() - 1) / stride + 1;
    std::vector<double> v;
    v.reserve(n * dim_);
    for (std::size_t k = 0; k < n; ++k) {
        auto p = point(k * stride);
        v.insert(v.end(), p.begin(), p.end());
    }
    return GridPath(t0_, dt_ * static_cast<double>(stride), dim_, std::move(v));
}

GridPath GridPath::slice(std::size_t first, std::size_t count) const {
    if (count == 0 || first + count > size()) throw DomainError("slice: range outside path");
    std::vector<double> v(values_.begin() + static_cast<std::ptrdiff_t>(first * dim_),
                          values_.begin() + static_cast<std::ptrdiff_t>((first + count) * dim_));
    return GridPath(time(first), dt_, dim_, std::move(v));
}

double GridPath::sup_norm() const {
    double m = 0.0;
    for (std::size_t k = 0; k < size(); ++k) m = std::max(m, euclidean_norm(point(k)));
    return m;
}

double euclidean_norm(std::span<const double> v) noexcept {
    if (v.size() == 1) return std::abs(v[0]);
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double sup_distance(const GridPath& a, const GridPath& b) {
    if (a.dim() != b.dim()) throw DomainError("sup_distance: dimension mismatch");
    if (std::abs(a.t0() - b.t0()) > 1e-9 * std::min(a.dt(), b.dt()))
        throw DomainError("sup_distance: paths start at different times");
    const GridPath& coarse = a.dt() >= b.dt() ? a : b;
    const GridPath& fine = a.dt() >= b.dt() ? b : a;
    const double ratio = coarse.dt() / fine.dt();
    const auto stride = static_cast<std::size_t>(std::llround(ratio));
    if (stride == 0 || std::abs(ratio - static_cast<double>(stride)) > 1e-9 * ratio)
        throw DomainError("sup_distance: grids are not nested");
    const std::size_t n = std::min(coarse.size(), (fine.size() - 1) / stride + 1);
    double m = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.dim(); ++j) {
            const double d = coarse(k, j) - fine(k * stride, j);
            s += d * d;
        }
        m = std::max(m, std::sqrt(s));
    }
    return m;
}

}  // namespace mixsdde
