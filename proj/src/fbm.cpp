#include "mixsdde/fbm.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include <unsupported/Eigen/FFT>

#include "mixsdde/errors.hpp"

namespace mixsdde::fbm {

std::string_view to_string(Method m) noexcept {
    return m == Method::kCholesky ? "cholesky" : "davies_harte";
}

Method method_from_string(std::string_view s) {
    if (s == "cholesky") return Method::kCholesky;
    if (s == "davies_harte") return Method::kDaviesHarte;
    throw ConstraintError("unknown fbm method '" + std::string(s) + "' (expected cholesky or davies_harte)");
}

void FbmParams::validate() const {
    if (!(hurst > 0.5 && hurst < 1.0)) throw ConstraintError("hurst must exceed 1/2 and be below 1");
    if (n_steps < 2) throw ConstraintError("fbm n_steps must be at least 2");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConstraintError("fbm horizon must be positive");
}

double fbm_covariance(double s, double t, double hurst) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("fbm_covariance: hurst must lie in (0, 1)");
    if (s < 0.0 || t < 0.0) throw DomainError("fbm_covariance: times must be non-negative");
    const double h2 = 2.0 * hurst;
    return 0.5 * (std::pow(s, h2) + std::pow(t, h2) - std::pow(std::abs(t - s), h2));
}

double fgn_autocovariance(std::size_t lag, double hurst) {
    const double h2 = 2.0 * hurst;
    const auto k = static_cast<double>(lag);
    if (lag == 0) return 1.0;
    return 0.5 * (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) + std::pow(k - 1.0, h2));
}

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a) {
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    // Locate the failing pivot with a plain column factorization.
    const auto n = a.rows();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double d = a(j, j) - l.row(j).head(j).squaredNorm();
        if (!(d > 0.0)) throw NumericalError("cholesky: covariance matrix is not positive definite", j);
        l(j, j) = std::sqrt(d);
        for (Eigen::Index i = j + 1; i < n; ++i)
            l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
    throw NumericalError("cholesky: factorization failed", static_cast<std::size_t>(n));
}

FbmSampler::FbmSampler(FbmParams params) : params_(params) {
    params_.validate();
    const std::size_t n = params_.n_steps;
    const double dt = params_.horizon / static_cast<double>(n);
    step_scale_ = std::pow(dt, params_.hurst);

    std::vector<double> acov(n + 1);
    for (std::size_t k = 0; k <= n; ++k) acov[k] = fgn_autocovariance(k, params_.hurst);

    if (params_.method == Method::kCholesky) {
        Eigen::MatrixXd cov(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) cov(i, j) = acov[i > j ? i - j : j - i];
        cholesky_ = cholesky_lower(cov);
        return;
    }

    // Circulant embedding of the n x n Toeplitz covariance into size 2n.
    const std::size_t m = 2 * n;
    std::vector<std::complex<double>> row(m), eig;
    for (std::size_t j = 0; j <= n; ++j) row[j] = acov[j];
    for (std::size_t j = n + 1; j < m; ++j) row[j] = acov[m - j];
    Eigen::FFT<double> fft;
    fft.fwd(eig, row);
    sqrt_eigenvalues_.resize(m);
    double max_eig = 0.0;
    for (const auto& e : eig) max_eig = std::max(max_eig, e.real());
    for (std::size_t j = 0; j < m; ++j) {
        double lambda = eig[j].real();
        if (lambda < 0.0) {
            if (lambda < -1e-10 * max_eig)
                throw NumericalError("davies_harte: negative circulant eigenvalue", j);
            lambda = 0.0;
        }
        sqrt_eigenvalues_[j] = std::sqrt(lambda / static_cast<double>(m));
    }
}

void FbmSampler::sample_increments(std::mt19937_64& engine, std::span<double> out) const {
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t n = params_.n_steps;
    if (params_.method == Method::kCholesky) {
        Eigen::VectorXd z(n);
        for (std::size_t i = 0; i < n; ++i) z[static_cast<Eigen::Index>(i)] = normal(engine);
        Eigen::VectorXd x = cholesky_.triangularView<Eigen::Lower>() * z;
        for (std::size_t i = 0; i < n; ++i) out[i] = x[static_cast<Eigen::Index>(i)];
        return;
    }
    const std::size_t m = sqrt_eigenvalues_.size();
    std::vector<std::complex<double>> w(m), y;
    for (std::size_t j = 0; j < m; ++j) {
        const double re = normal(engine);
        const double im = normal(engine);
        w[j] = sqrt_eigenvalues_[j] * std::complex<double>(re, im);
    }
    Eigen::FFT<double> fft;
    fft.fwd(y, w);
    for (std::size_t i = 0; i < n; ++i) out[i] = y[i].real();
}

GridPath FbmSampler::sample(const SeedSpec& seed, std::size_t dim) const {
    if (dim == 0) throw DomainError("fbm sample: dimension must be positive");
    const std::size_t n = params_.n_steps;
    const double dt = params_.horizon / static_cast<double>(n);
    auto engine = make_engine(seed, StreamPurpose::kFbm);
    GridPath path = GridPath::zeros(0.0, dt, n + 1, dim);
    std::vector<double> incr(n);
    for (std::size_t j = 0; j < dim; ++j) {
        sample_increments(engine, incr);
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            acc += incr[k];
            path(k + 1, j) = step_scale_ * acc;
        }
    }
    return path;
}

GridPath sample_fbm(const FbmParams& params, const SeedSpec& seed) {
    return FbmSampler(params).sample(seed);
}

GridPath sample_wiener(std::size_t n_steps, double horizon, std::size_t dim, const SeedSpec& seed) {
    if (n_steps < 1) throw ConstraintError("wiener n_steps must be at least 1");
    if (!(horizon > 0.0)) throw ConstraintError("wiener horizon must be positive");
    if (dim < 1) throw ConstraintError("wiener dimension must be at least 1");
    const double dt = horizon / static_cast<double>(n_steps);
    const double sd = std::sqrt(dt);
    auto engine = make_engine(seed, StreamPurpose::kWiener);
    std::normal_distribution<double> normal(0.0, 1.0);
    GridPath path = GridPath::zeros(0.0, dt, n_steps + 1, dim);
    for (std::size_t k = 0; k < n_steps; ++k)
        for (std::size_t j = 0; j < dim; ++j) path(k + 1, j) = path(k, j) + sd * normal(engine);
    return path;
}

double holder_seminorm(const GridPath& path, double lambda, std::optional<std::pair<double, double>> window) {
    if (!(lambda > 0.0 && lambda <= 1.0)) throw DomainError("holder_seminorm: lambda must lie in (0, 1]");
    std::size_t first = 0;
    std::size_t last = path.size() - 1;
    if (window) {
        const double eps = 1e-9 * path.dt();
        const double lo = std::max(window->first, path.t0());
        const double hi = std::min(window->second, path.end_time());
        if (hi < lo) throw DomainError("holder_seminorm: empty window");
        first = static_cast<std::size_t>(std::ceil((lo - path.t0()) / path.dt() - 1e-9));
        last = static_cast<std::size_t>(std::floor((hi - path.t0() + eps) / path.dt()));
    }
    if (last <= first) throw DomainError("holder_seminorm: window holds fewer than two grid points");
    const std::size_t n = last - first;
    std::vector<double> inv_len(n + 1);
    for (std::size_t lag = 1; lag <= n; ++lag)
        inv_len[lag] = 1.0 / std::pow(static_cast<double>(lag) * path.dt(), lambda);
    const std::size_t d = path.dim();
    double best = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        auto pi = path.point(i);
        for (std::size_t j = i + 1; j <= last; ++j) {
            auto pj = path.point(j);
            double diff;
            if (d == 1) {
                diff = std::abs(pj[0] - pi[0]);
            } else {
                double s = 0.0;
                for (std::size_t c = 0; c < d; ++c) s += (pj[c] - pi[c]) * (pj[c] - pi[c]);
                diff = std::sqrt(s);
            }
            best = std::max(best, diff * inv_len[j - i]);
        }
    }
    return best;
}

}  // namespace mixsdde::fbm
