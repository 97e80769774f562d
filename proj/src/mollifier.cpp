#include "mixsdde/mollifier.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "mixsdde/errors.hpp"

namespace mixsdde::solver {

void clamp_to_ball(std::span<double> x, double radius) noexcept {
    const double n = euclidean_norm(x);
    if (n <= radius) return;
    const double s = radius / n;
    for (double& v : x) v *= s;
}

namespace {

void check_level(const GridPath& driver, std::size_t level) {
    if (level == 0) throw ConstraintError("mollifier level N must be at least 1");
    if (driver.dt() > 1.0 / (4.0 * static_cast<double>(level)) * (1.0 + 1e-12))
        throw ConstraintError("driver grid step " + std::to_string(driver.dt()) + " is too coarse for mollifier level " +
                              std::to_string(level) + " (needs dt <= 1/(4N))");
}

GridPath clamped_copy(const GridPath& driver, double radius) {
    GridPath out = driver;
    for (std::size_t k = 0; k < out.size(); ++k) clamp_to_ball(out.point(k), radius);
    return out;
}

}  // namespace

WindowStart window_start(std::size_t k, double window_steps) noexcept {
    const double pos = static_cast<double>(k) - window_steps;
    if (pos <= 0.0) return {};
    double j = std::floor(pos);
    double frac = pos - j;
    // Snap round-off so grid-aligned windows start exactly on a node.
    if (frac > 1.0 - 1e-9) {
        j += 1.0;
        frac = 0.0;
    } else if (frac < 1e-9) {
        frac = 0.0;
    }
    return {static_cast<std::size_t>(j), frac};
}

void mollified_rate_at(const GridPath& clamped, std::size_t k, std::size_t level, std::span<double> out) {
    const double n = static_cast<double>(level);
    const double window_steps = 1.0 / (n * clamped.dt());
    const auto [j, frac] = window_start(k, window_steps);
    for (std::size_t c = 0; c < clamped.dim(); ++c) {
        double start = clamped(j, c);
        if (frac > 0.0) start += frac * (clamped(j + 1, c) - clamped(j, c));
        out[c] = n * (clamped(k, c) - start);
    }
}

MollifiedDriver mollify_driver(const GridPath& driver, std::size_t level) {
    check_level(driver, level);
    if (std::abs(driver.t0()) > 1e-12) throw DomainError("mollify_driver: driver must start at t = 0");
    const double n = static_cast<double>(level);
    const double dt = driver.dt();
    const std::size_t d = driver.dim();
    const GridPath hz = clamped_copy(driver, n);

    // Cumulative integral of the interpolant at the nodes.
    std::vector<double> cum(hz.size() * d, 0.0);
    for (std::size_t k = 1; k < hz.size(); ++k)
        for (std::size_t c = 0; c < d; ++c)
            cum[k * d + c] = cum[(k - 1) * d + c] + 0.5 * dt * (hz(k - 1, c) + hz(k, c));

    const double window_steps = 1.0 / (n * dt);
    GridPath path = GridPath::zeros(driver.t0(), dt, driver.size(), d);
    GridPath rate = GridPath::zeros(driver.t0(), dt, driver.size(), d);
    for (std::size_t k = 0; k < hz.size(); ++k) {
        const auto [j, frac] = window_start(k, window_steps);
        const double s = frac * dt;
        for (std::size_t c = 0; c < d; ++c) {
            double start = cum[j * d + c];
            if (frac > 0.0) {
                const double slope = (hz(j + 1, c) - hz(j, c)) / dt;
                start += s * hz(j, c) + 0.5 * s * s * slope;
            }
            path(k, c) = n * (cum[k * d + c] - start);
        }
        mollified_rate_at(hz, k, level, rate.point(k));
    }
    return {std::move(path), std::move(rate)};
}

}  // namespace mixsdde::solver
