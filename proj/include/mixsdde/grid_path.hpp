#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mixsdde {

// A d-dimensional sample path on the uniform grid t0, t0 + dt, ..., stored
// row-major (point k occupies values[k*dim, (k+1)*dim)). Carrier for the
// solution X, the drivers W and Z, and the initial function eta.
class GridPath {
public:
    GridPath() = default;
    GridPath(double t0, double dt, std::size_t dim, std::vector<double> values);

    static GridPath zeros(double t0, double dt, std::size_t n_points, std::size_t dim);
    static GridPath constant(double t0, double dt, std::size_t n_points, std::span<const double> value);
    static GridPath sample(double t0, double dt, std::size_t n_points,
                           const std::function<double(double)>& f);

    double t0() const noexcept { return t0_; }
    double dt() const noexcept { return dt_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return dim_ == 0 ? 0 : values_.size() / dim_; }
    bool empty() const noexcept { return values_.empty(); }

    double time(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) * dt_; }
    double end_time() const noexcept { return time(size() - 1); }

    double operator()(std::size_t k, std::size_t j = 0) const noexcept { return values_[k * dim_ + j]; }
    double& operator()(std::size_t k, std::size_t j = 0) noexcept { return values_[k * dim_ + j]; }

    std::span<const double> point(std::size_t k) const noexcept { return {values_.data() + k * dim_, dim_}; }
    std::span<double> point(std::size_t k) noexcept { return {values_.data() + k * dim_, dim_}; }
    std::span<const double> data() const noexcept { return values_; }
    std::span<double> data() noexcept { return values_; }

    std::vector<double> component(std::size_t j) const;

    // Node index of time t. Throws DomainError when t is not within 1e-9*dt
    // of a node or lies outside the path.
    std::size_t index_of(double t) const;
    // Linear interpolation of component j at an arbitrary time inside the path.
    double interpolate(double t, std::size_t j = 0) const;

    // Every stride-th node starting at node 0 (restriction to a coarser grid).
    GridPath restrict_to(std::size_t stride) const;
    // Nodes [first, first + count).
    GridPath slice(std::size_t first, std::size_t count) const;

    // Supremum over all nodes of the Euclidean norm of the point.
    double sup_norm() const;

    friend bool operator==(const GridPath&, const GridPath&) = default;

private:
    double t0_ = 0.0;
    double dt_ = 1.0;
    std::size_t dim_ = 1;
    std::vector<double> values_;
};

double euclidean_norm(std::span<const double> v) noexcept;

// max_k |a(k) - b(k)| over the common nodes of two paths; the paths must share
// t0 and one grid must be an integer refinement of the other.
double sup_distance(const GridPath& a, const GridPath& b);

}  // namespace mixsdde
