#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mixsdde/grid_path.hpp"
#include "mixsdde/rng.hpp"

namespace mixsdde::fbm {

enum class Method { kCholesky, kDaviesHarte };

std::string_view to_string(Method m) noexcept;
Method method_from_string(std::string_view s);

struct FbmParams {
    double hurst = 0.75;
    std::size_t n_steps = 512;
    double horizon = 1.0;
    Method method = Method::kCholesky;

    // Throws ConstraintError unless hurst is in (1/2, 1), n_steps >= 2 and
    // horizon > 0.
    void validate() const;
};

// Cov(B^H(s), B^H(t)) = (s^2H + t^2H - |t-s|^2H) / 2.
double fbm_covariance(double s, double t, double hurst);

// Autocovariance of unit-step fractional Gaussian noise at integer lag k.
double fgn_autocovariance(std::size_t lag, double hurst);

// Exact Gaussian sampler for B^H on {0, dt, ..., T}. The factorization (or the
// circulant eigenvalues) is computed once in the constructor; sample() is const
// and safe to call concurrently.
//
// Both methods draw increments (fractional Gaussian noise) and accumulate them,
// so the Cholesky factor is of the Toeplitz increment covariance rather than of
// the much worse conditioned covariance of the path itself.
class FbmSampler {
public:
    explicit FbmSampler(FbmParams params);

    const FbmParams& params() const noexcept { return params_; }

    // One path with `dim` independent components; value 0 at t = 0.
    GridPath sample(const SeedSpec& seed, std::size_t dim = 1) const;

private:
    void sample_increments(std::mt19937_64& engine, std::span<double> out) const;

    FbmParams params_;
    double step_scale_ = 1.0;  // dt^H
    Eigen::MatrixXd cholesky_;  // lower factor, kCholesky only
    std::vector<double> sqrt_eigenvalues_;  // sqrt(lambda_j / 2n), kDaviesHarte only
};

GridPath sample_fbm(const FbmParams& params, const SeedSpec& seed);

// Standard Wiener process in R^dim on {0, T/n, ..., T}.
GridPath sample_wiener(std::size_t n_steps, double horizon, std::size_t dim, const SeedSpec& seed);

// Lower Cholesky factor of a symmetric matrix. Throws NumericalError carrying
// the index of the first non-positive pivot.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a);

// max over grid pairs x < y (inside `window`, if given) of |f(y)-f(x)|/(y-x)^lambda,
// with |.| the Euclidean norm for vector paths.
double holder_seminorm(const GridPath& path, double lambda,
                       std::optional<std::pair<double, double>> window = std::nullopt);

}  // namespace mixsdde::fbm
