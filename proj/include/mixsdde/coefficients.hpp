#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mixsdde/segment.hpp"

namespace mixsdde {

enum class Family { kConstant, kNoDelay, kLinear, kPointwiseDelay, kDistributedDelay };
enum class Nonlinearity { kIdentity, kSin, kTanh };
enum class TimeFactorKind { kNone, kSin, kCos };
enum class KernelKind { kUniform, kExponential };
enum class Which { kDrift, kDiffusion, kDriver };

std::string_view to_string(Family f) noexcept;
std::string_view to_string(Nonlinearity n) noexcept;
std::string_view to_string(TimeFactorKind k) noexcept;
std::string_view to_string(KernelKind k) noexcept;
Family family_from_string(std::string_view s);
Nonlinearity nonlinearity_from_string(std::string_view s);
TimeFactorKind time_factor_from_string(std::string_view s);
KernelKind kernel_from_string(std::string_view s);

// m(t) in {1, sin(w t), cos(w t)}.
struct TimeFactor {
    TimeFactorKind kind = TimeFactorKind::kNone;
    double frequency = 1.0;

    double operator()(double t) const noexcept;
    double sup() const noexcept { return 1.0; }
    double lipschitz() const noexcept { return kind == TimeFactorKind::kNone ? 0.0 : std::abs(frequency); }
};

// Probability weight on [-window, 0]: uniform 1/window, or exponential
// rate * e^{rate u} / (1 - e^{-rate window}).
struct DelayKernel {
    KernelKind kind = KernelKind::kUniform;
    double rate = 1.0;

    double weight(double u, double window) const noexcept;
};

// One R^d-valued column of a coefficient:
//   m(t) * (offset + now * phi(psi(0)) + lagged * phi(psi(-tau)) + distributed * int w(u) phi(psi(u)) du)
// Empty matrices are structural zeros.
struct ColumnMap {
    Eigen::VectorXd offset;
    Eigen::MatrixXd now;
    Eigen::MatrixXd lagged;
    Eigen::MatrixXd distributed;
    TimeFactor time;

    bool is_zero() const;
};

// Assumption constants asserted by the user; unset ones default to the
// closed-form values of the family.
struct ClaimedConstants {
    std::optional<double> growth;      // K
    std::optional<double> lipschitz;   // K_R (uniform in R for the built-in families)
    std::optional<double> beta;
    std::optional<double> theta;
};

struct CoefficientSpec {
    Family family = Family::kLinear;
    std::size_t state_dim = 1;   // d
    std::size_t wiener_dim = 1;  // m
    std::size_t driver_dim = 1;  // l
    Nonlinearity nonlinearity = Nonlinearity::kIdentity;
    double tap = 0.0;  // tau: point delay, or the window of the distributed kernel
    DelayKernel kernel;
    ColumnMap drift;
    std::vector<ColumnMap> diffusion;  // wiener_dim columns
    std::vector<ColumnMap> driver;     // driver_dim columns
    ClaimedConstants claimed;

    // Checks dimensions and the structural restrictions of the family.
    void validate() const;

    // Longest look-back any coefficient uses.
    double required_history() const noexcept {
        return family == Family::kConstant || family == Family::kNoDelay ? 0.0 : tap;
    }

    // Coefficients f(s, x, x): every delayed reading replaced by psi(0).
    CoefficientSpec without_delay() const;

    // Same spec with the point delay moved to `new_tap`.
    CoefficientSpec with_tap(double new_tap) const;

    bool driver_is_zero() const;

    // Scalar geometric equation dX = a X dt + b X dW + c X dZ.
    static CoefficientSpec geometric(double a, double b, double c);
};

// Closed-form constants implied by a family instance (Euclidean norms on
// vectors, Frobenius norm on the d x m and d x l matrices, spectral norm on gains).
struct ClosedFormConstants {
    double growth = 0.0;          // H1
    double derivative_bound = 0.0;  // H2
    double lipschitz = 0.0;       // H3, valid for every R
    double time_holder = 0.0;     // H4 at the given beta and horizon
    double constant_k = 0.0;      // max of the above
};

ClosedFormConstants closed_form_constants(const CoefficientSpec& spec, double beta, double horizon);

// Reusable evaluator bound to a grid step. Not thread-safe (holds scratch
// buffers); create one per solve.
class CoefficientEvaluator {
public:
    CoefficientEvaluator(const CoefficientSpec& spec, double dt);

    const CoefficientSpec& spec() const noexcept { return *spec_; }

    // Reads the segment once; the coefficient calls below reuse these readings.
    void load(const Segment& psi);

    // Output is column-major d x cols (cols = 1, m, l).
    void drift(double t, std::span<double> out) const;
    void diffusion(double t, std::span<double> out) const;
    void driver(double t, std::span<double> out) const;
    void evaluate(Which which, double t, std::span<double> out) const;

    // Fréchet derivative of the driver coefficient at the loaded segment,
    // applied to a direction (a segment on the same window).
    void driver_derivative(double t, const Segment& direction, std::span<double> out) const;

    std::size_t tap_lag() const noexcept { return tap_lag_; }

private:
    void apply(const ColumnMap& map, double t, std::span<double> out) const;
    void apply_derivative(const ColumnMap& map, double t, const Segment& direction, std::span<double> out) const;

    const CoefficientSpec* spec_;
    double dt_;
    std::size_t tap_lag_ = 0;
    std::vector<double> kernel_weights_;  // trapezoid weights for lags 0..tap_lag
    std::optional<Segment> loaded_;
    Eigen::VectorXd phi_now_, phi_lag_, phi_dist_;
};

// d x cols matrix of coefficient `which` at (t, psi).
Eigen::MatrixXd eval_coefficient(const CoefficientSpec& spec, Which which, double t, const Segment& psi);

double apply_nonlinearity(Nonlinearity n, double x) noexcept;
double nonlinearity_derivative(Nonlinearity n, double x) noexcept;
// Lipschitz constant of the derivative of phi.
double nonlinearity_curvature(Nonlinearity n) noexcept;

}  // namespace mixsdde
