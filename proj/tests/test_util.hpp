#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mixsdde/grid_path.hpp"

namespace testutil {

inline std::string fixture(const std::string& name) { return std::string(MIXSDDE_FIXTURES) + "/" + name; }

// f sampled on {a, a + h, ..., b} with n cells.
inline mixsdde::GridPath sampled(double a, double b, std::size_t n, const std::function<double(double)>& f) {
    return mixsdde::GridPath::sample(a, (b - a) / static_cast<double>(n), n + 1, f);
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

inline double stderr_of_mean(const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace testutil
