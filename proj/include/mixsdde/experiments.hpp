#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mixsdde/assumptions.hpp"
#include "mixsdde/coefficients.hpp"
#include "mixsdde/fbm.hpp"
#include "mixsdde/model.hpp"
#include "mixsdde/solver.hpp"
#include "mixsdde/stats.hpp"

namespace mixsdde::exp {

enum class Kind { kCoeffConvergence, kVanishingDelay, kEulerRefinement, kItoLimit, kMoments, kQuasiContract };
enum class Perturbation { kNone, kDriftShift, kGainShift, kInitialShift };
enum class DriverMethod { kAuto, kCholesky, kDaviesHarte };

std::string_view to_string(Kind k) noexcept;       // coeff, delay, euler, ito, moments, quasi
std::string_view report_name(Kind k) noexcept;     // coeff_convergence, ...
Kind kind_from_string(std::string_view s);          // accepts both spellings
std::string_view to_string(Perturbation p) noexcept;
Perturbation perturbation_from_string(std::string_view s);
std::string_view to_string(DriverMethod m) noexcept;
DriverMethod driver_method_from_string(std::string_view s);

// Cholesky up to 4096 steps, circulant embedding above.
fbm::Method resolve_method(DriverMethod m, std::size_t n_steps) noexcept;

// Equation, exponents and discretization shared by `solve` and every experiment.
struct ModelConfig {
    HolderParams holder;
    CoefficientSpec coefficients;
    InitialSpec initial;
    double horizon = 1.0;
    double delay = 0.0;
    DriverMethod driver_method = DriverMethod::kAuto;
    std::size_t steps = 1024;
    double explosion_threshold = 1e8;
    solver::Scheme scheme = solver::Scheme::kEulerMixed;
    std::size_t mollifier_level = 0;  // euler_ito only

    void validate() const;
    double dt() const noexcept { return horizon / static_cast<double>(steps); }
    solver::SolverConfig solver_config(std::size_t n_steps) const;
    InitialCondition initial_condition(double dt) const;
};

// Pre-registered pass criteria; unset ones are not evaluated.
struct Criteria {
    std::optional<double> finest_exceedance_below;
    std::optional<bool> exceedance_nonincreasing;       // up to Wilson CI overlap
    std::optional<bool> zero_distance;                  // every distance exactly 0
    std::optional<std::size_t> mean_nonincreasing_at_least;  // consecutive comparisons
    std::optional<bool> mean_strictly_decreasing;
    std::optional<double> slope_target;
    std::optional<double> slope_tolerance;
    std::optional<double> ratio_spread_below;           // quasi: max/min ratio
    std::optional<double> oracle_within_se;             // moments: terminal p=2 oracle
    std::optional<bool> sup_moment_dominates_oracle;    // moments
    std::optional<double> stability_below;              // moments: relative change M/2 -> M
    std::optional<bool> fail_on_heavy_tail;             // moments
    std::optional<bool> assumptions_hold;
};

struct Truncation {
    double driver_bound = 10.0;     // M for ||Z||_{0;T}
    double solution_bound = 1e3;    // R for ||X||_T
};

struct ExperimentConfig {
    Kind kind = Kind::kEulerRefinement;
    std::uint64_t seed = 0;
    ModelConfig model;
    std::size_t replicas = 200;
    double epsilon = 0.1;
    // coeff: n; delay: tau; euler: mesh steps; ito: N; moments: p; quasi: perturbation size.
    std::vector<double> levels;
    Perturbation perturbation = Perturbation::kNone;
    Truncation truncation;
    std::optional<int> power;  // quasi: p (default smallest even integer >= 4/(1-2 alpha))
    std::size_t assumption_samples = 200;
    Criteria criteria;

    void validate() const;
};

struct CriterionResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct LevelResult {
    double level = 0.0;
    stats::Proportion exceedance;
    stats::Summary distance;
    std::vector<double> distances;  // per replica, in replica order
};

struct ConvergenceReport {
    Kind kind = Kind::kEulerRefinement;
    std::uint64_t seed = 0;
    std::size_t replicas = 0;
    double epsilon = 0.0;
    std::size_t finest_steps = 0;  // grid on which the drivers were sampled
    std::string reference;         // what X^0 is
    std::vector<LevelResult> levels;
    std::optional<double> slope;   // log mean distance against log level (descriptive)
    std::vector<CriterionResult> criteria;
    AssumptionReport assumptions;

    bool passed() const;
};

struct MomentLevel {
    double p = 0.0;
    stats::Summary sup_power;        // ||X||_{0,T,inf}^p
    stats::Summary truncated_power;  // ||X||_T^p 1_{A_M}
    stats::Summary terminal_power;   // |X(T)|^p
    double sup_lp_norm = 0.0;        // E[...]^{1/p}
    double half_sample_mean = 0.0;   // sup moment over the first half of the replicas
    double relative_change = 0.0;    // |full - half| / full
    double top_share = 0.0;          // share of the top 1% in the sample sum
    bool heavy_tail = false;
    std::optional<double> oracle;    // lognormal terminal moment when available
};

struct MomentReport {
    std::uint64_t seed = 0;
    std::size_t replicas = 0;
    std::size_t steps = 0;
    double indicator_rate = 0.0;  // fraction of replicas inside A_M
    std::vector<MomentLevel> levels;
    std::vector<double> survival_x;  // empirical survival function of ||X||_{0,T,inf}
    std::vector<double> survival_p;
    std::vector<CriterionResult> criteria;
    AssumptionReport assumptions;

    bool passed() const;
};

struct QuasiLevel {
    double perturbation = 0.0;
    double numerator = 0.0;    // E[||Y1 - Y2||_{inf,T}^p 1_A]
    double denominator = 0.0;  // E[||Z1 - Z2||_{0;T}^p 1_A]
    std::optional<double> ratio;
    std::size_t in_event = 0;  // replicas inside A_{M,R}
};

struct QuasiReport {
    std::uint64_t seed = 0;
    std::size_t replicas = 0;
    int power = 0;
    std::vector<QuasiLevel> levels;
    std::optional<double> spread;  // max / min ratio
    bool inconclusive = false;
    bool unbounded_growth = false;
    std::vector<CriterionResult> criteria;
    AssumptionReport assumptions;

    bool passed() const;
};

// Fraction of distances exceeding epsilon with its Wilson 95% interval.
stats::Proportion estimate_exceedance(std::span<const double> distances, double epsilon);

ConvergenceReport run_coefficient_convergence(const ExperimentConfig& cfg, std::size_t workers = 1);
ConvergenceReport run_vanishing_delay(const ExperimentConfig& cfg, std::size_t workers = 1);
ConvergenceReport run_euler_refinement(const ExperimentConfig& cfg, std::size_t workers = 1);
ConvergenceReport run_ito_limit(const ExperimentConfig& cfg, std::size_t workers = 1);
MomentReport estimate_moments(const ExperimentConfig& cfg, std::size_t workers = 1);
QuasiReport estimate_quasi_contractivity(const ExperimentConfig& cfg, std::size_t workers = 1);

// The configured equation on [-r, T] driven by the W and Z of one replica.
// Honors model.scheme; euler_ito uses the mollified drift at model.mollifier_level.
GridPath solve_model(const ModelConfig& model, std::uint64_t seed, std::size_t replica = 0);

// Scalar geometric equation with constant initial value: (a, b, c, x0).
struct GeometricParams {
    double a, b, c, x0;
};
std::optional<GeometricParams> as_geometric(const ModelConfig& model);

}  // namespace mixsdde::exp
