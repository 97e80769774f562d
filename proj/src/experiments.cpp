#include "mixsdde/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "mixsdde/errors.hpp"
#include "mixsdde/fraccalc.hpp"
#include "mixsdde/parallel.hpp"

namespace mixsdde::exp {

namespace {

constexpr Kind kAllKinds[] = {Kind::kCoeffConvergence, Kind::kVanishingDelay, Kind::kEulerRefinement,
                              Kind::kItoLimit,         Kind::kMoments,        Kind::kQuasiContract};

bool is_integer(double v) { return v >= 1.0 && std::floor(v) == v; }

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

std::string_view to_string(Kind k) noexcept {
    switch (k) {
        case Kind::kCoeffConvergence: return "coeff";
        case Kind::kVanishingDelay: return "delay";
        case Kind::kEulerRefinement: return "euler";
        case Kind::kItoLimit: return "ito";
        case Kind::kMoments: return "moments";
        case Kind::kQuasiContract: return "quasi";
    }
    return "euler";
}

std::string_view report_name(Kind k) noexcept {
    switch (k) {
        case Kind::kCoeffConvergence: return "coeff_convergence";
        case Kind::kVanishingDelay: return "vanishing_delay";
        case Kind::kEulerRefinement: return "euler_refinement";
        case Kind::kItoLimit: return "ito_limit";
        case Kind::kMoments: return "moments";
        case Kind::kQuasiContract: return "quasi_contract";
    }
    return "euler_refinement";
}

Kind kind_from_string(std::string_view s) {
    for (Kind k : kAllKinds)
        if (to_string(k) == s || report_name(k) == s) return k;
    throw ConstraintError("unknown experiment kind '" + std::string(s) +
                          "' (expected coeff, delay, euler, ito, moments or quasi)");
}

std::string_view to_string(Perturbation p) noexcept {
    switch (p) {
        case Perturbation::kNone: return "none";
        case Perturbation::kDriftShift: return "drift_shift";
        case Perturbation::kGainShift: return "gain_shift";
        case Perturbation::kInitialShift: return "initial_shift";
    }
    return "none";
}

Perturbation perturbation_from_string(std::string_view s) {
    for (auto p : {Perturbation::kNone, Perturbation::kDriftShift, Perturbation::kGainShift,
                   Perturbation::kInitialShift})
        if (to_string(p) == s) return p;
    throw ConstraintError("unknown perturbation '" + std::string(s) + "'");
}

std::string_view to_string(DriverMethod m) noexcept {
    switch (m) {
        case DriverMethod::kAuto: return "auto";
        case DriverMethod::kCholesky: return "cholesky";
        case DriverMethod::kDaviesHarte: return "davies_harte";
    }
    return "auto";
}

DriverMethod driver_method_from_string(std::string_view s) {
    if (s == "auto") return DriverMethod::kAuto;
    if (s == "cholesky") return DriverMethod::kCholesky;
    if (s == "davies_harte") return DriverMethod::kDaviesHarte;
    throw ConstraintError("unknown driver method '" + std::string(s) + "' (expected auto, cholesky or davies_harte)");
}

fbm::Method resolve_method(DriverMethod m, std::size_t n_steps) noexcept {
    switch (m) {
        case DriverMethod::kCholesky: return fbm::Method::kCholesky;
        case DriverMethod::kDaviesHarte: return fbm::Method::kDaviesHarte;
        case DriverMethod::kAuto: break;
    }
    return n_steps <= 4096 ? fbm::Method::kCholesky : fbm::Method::kDaviesHarte;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void require_grid_multiple(double length, double dt, const std::string& what) {
    try {
        steps_of(length, dt, what.c_str());
    } catch (const DomainError& e) {
        throw ConstraintError(e.what());
    }
}

}  // namespace

void ModelConfig::validate() const {
    holder.validate();
    coefficients.validate();
    initial.validate(coefficients.state_dim);
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConstraintError("horizon must be positive");
    if (steps < 1) throw ConstraintError("solver steps must be at least 1");
    if (!(explosion_threshold > 0.0)) throw ConstraintError("explosion threshold must be positive");
    if (!(delay >= 0.0)) throw ConstraintError("delay r must be non-negative");
    if (coefficients.required_history() > delay + 1e-12)
        throw ConstraintError("delay r = " + fmt(delay) + " is shorter than the delay tap " + fmt(coefficients.tap));
    require_grid_multiple(delay, dt(), "delay r");
    if (coefficients.required_history() > 0.0) require_grid_multiple(coefficients.tap, dt(), "delay tap");
    if (scheme == solver::Scheme::kEulerIto) {
        if (mollifier_level < 1) throw ConstraintError("euler_ito scheme needs a mollifier level of at least 1");
        if (dt() > 1.0 / (4.0 * static_cast<double>(mollifier_level)) * (1.0 + 1e-12))
            throw ConstraintError("solver grid is too coarse for mollifier level " + std::to_string(mollifier_level) +
                                  " (needs dt <= 1/(4N))");
    }
}

solver::SolverConfig ModelConfig::solver_config(std::size_t n_steps) const {
    solver::SolverConfig c;
    c.n_steps = n_steps;
    c.horizon = horizon;
    c.delay = delay;
    c.explosion_threshold = explosion_threshold;
    c.scheme = scheme;
    return c;
}

InitialCondition ModelConfig::initial_condition(double dt) const {
    return make_initial_condition(initial, delay, dt, holder.theta);
}

void ExperimentConfig::validate() const {
    model.validate();
    if (replicas < 30)
        throw ConstraintError("replicas must be at least 30 (got " + std::to_string(replicas) + ")");
    if (!(epsilon > 0.0)) throw ConstraintError("epsilon must be positive");
    if (levels.empty()) throw ConstraintError("level schedule must not be empty");
    const bool decreasing = kind == Kind::kVanishingDelay || kind == Kind::kQuasiContract;
    for (std::size_t i = 1; i < levels.size(); ++i) {
        const bool ok = decreasing ? levels[i] < levels[i - 1] : levels[i] > levels[i - 1];
        if (!ok)
            throw ConstraintError(std::string("level schedule must be strictly ") +
                                  (decreasing ? "decreasing" : "increasing"));
    }
    if (!(truncation.driver_bound >= 1.0)) throw ConstraintError("truncation M must be at least 1");
    if (!(truncation.solution_bound >= 1.0)) throw ConstraintError("truncation R must be at least 1");
    if (assumption_samples < 1) throw ConstraintError("assumption sample budget must be positive");

    const double dt = model.dt();
    switch (kind) {
        case Kind::kCoeffConvergence:
            for (double n : levels)
                if (!(n > 0.0)) throw ConstraintError("coefficient convergence levels must be positive");
            break;
        case Kind::kVanishingDelay: {
            const Family f = model.coefficients.family;
            if (f != Family::kPointwiseDelay && f != Family::kLinear)
                throw ConstraintError("vanishing delay needs the pointwise_delay or linear family");
            for (double tau : levels) {
                if (!(tau > 0.0)) throw ConstraintError("delay levels must be positive");
                if (tau > model.delay + 1e-12)
                    throw ConstraintError("delay level " + fmt(tau) + " exceeds the delay horizon r");
                require_grid_multiple(tau, dt, "delay level");
            }
            break;
        }
        case Kind::kEulerRefinement:
            for (double n : levels) {
                if (!is_integer(n)) throw ConstraintError("euler mesh levels must be positive integers");
                require_grid_multiple(model.delay, model.horizon / n, "delay r on mesh " + fmt(n));
                if (std::fmod(levels.back(), n) != 0.0)
                    throw ConstraintError("euler mesh " + fmt(n) + " does not divide the finest mesh " +
                                          fmt(levels.back()));
            }
            break;
        case Kind::kItoLimit:
            for (double n : levels) {
                if (!is_integer(n)) throw ConstraintError("mollifier levels must be positive integers");
                if (dt > 1.0 / (4.0 * n) * (1.0 + 1e-12))
                    throw ConstraintError("solver grid is too coarse for mollifier level " + fmt(n) +
                                          " (needs dt <= 1/(4N))");
            }
            break;
        case Kind::kMoments:
            for (double p : levels)
                if (!(p > 0.0)) throw ConstraintError("moment orders must be positive");
            break;
        case Kind::kQuasiContract: {
            for (double e : levels)
                if (!(e >= 0.0)) throw ConstraintError("driver perturbations must be non-negative");
            if (power) {
                const double bound = 4.0 / (1.0 - 2.0 * model.holder.alpha);
                if (static_cast<double>(*power) < bound - 1e-12)
                    throw ConstraintError("p must be at least 4/(1-2 alpha) = " + fmt(bound));
            }
            break;
        }
    }
    if (kind != Kind::kCoeffConvergence && perturbation != Perturbation::kNone)
        throw ConstraintError("perturbation applies to the coeff experiment only");

    const bool convergence = kind == Kind::kCoeffConvergence || kind == Kind::kVanishingDelay ||
                             kind == Kind::kEulerRefinement || kind == Kind::kItoLimit;
    auto only = [&](bool present, bool allowed, const char* name) {
        if (present && !allowed)
            throw ConstraintError(std::string("criterion ") + name + " does not apply to the " +
                                  std::string(to_string(kind)) + " experiment");
    };
    const Criteria& c = criteria;
    only(c.finest_exceedance_below.has_value(), convergence, "finest_exceedance_below");
    only(c.exceedance_nonincreasing.has_value(), convergence, "exceedance_nonincreasing");
    only(c.zero_distance.has_value(), convergence, "zero_distance");
    only(c.mean_nonincreasing_at_least.has_value(), convergence, "mean_nonincreasing_at_least");
    only(c.mean_strictly_decreasing.has_value(), convergence, "mean_strictly_decreasing");
    only(c.slope_target.has_value() || c.slope_tolerance.has_value(), convergence, "slope");
    only(c.ratio_spread_below.has_value(), kind == Kind::kQuasiContract, "ratio_spread_below");
    only(c.oracle_within_se.has_value(), kind == Kind::kMoments, "oracle_within_se");
    only(c.sup_moment_dominates_oracle.has_value(), kind == Kind::kMoments, "sup_moment_dominates_oracle");
    only(c.stability_below.has_value(), kind == Kind::kMoments, "stability_below");
    only(c.fail_on_heavy_tail.has_value(), kind == Kind::kMoments, "fail_on_heavy_tail");
}

bool ConvergenceReport::passed() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.passed; });
}
bool MomentReport::passed() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.passed; });
}
bool QuasiReport::passed() const {
    return std::all_of(criteria.begin(), criteria.end(), [](const CriterionResult& c) { return c.passed; });
}

stats::Proportion estimate_exceedance(std::span<const double> distances, double epsilon) {
    if (distances.size() < 30)
        throw ConstraintError("exceedance needs at least 30 samples (got " + std::to_string(distances.size()) + ")");
    if (!(epsilon > 0.0)) throw ConstraintError("epsilon must be positive");
    std::size_t k = 0;
    for (double d : distances)
        if (d > epsilon) ++k;
    return stats::wilson_interval(k, distances.size());
}

std::optional<GeometricParams> as_geometric(const ModelConfig& model) {
    const CoefficientSpec& s = model.coefficients;
    if (s.state_dim != 1 || s.wiener_dim != 1 || s.driver_dim != 1) return std::nullopt;
    if (s.nonlinearity != Nonlinearity::kIdentity) return std::nullopt;
    if (s.family != Family::kNoDelay && s.family != Family::kLinear) return std::nullopt;
    if (model.initial.kind != InitialKind::kConstant) return std::nullopt;
    auto gain = [](const ColumnMap& m) -> std::optional<double> {
        if (m.time.kind != TimeFactorKind::kNone) return std::nullopt;
        if (m.offset.size() != 0 && !m.offset.isZero(0.0)) return std::nullopt;
        if (m.lagged.size() != 0 && !m.lagged.isZero(0.0)) return std::nullopt;
        if (m.distributed.size() != 0 && !m.distributed.isZero(0.0)) return std::nullopt;
        return m.now.size() == 0 ? 0.0 : m.now(0, 0);
    };
    const auto a = gain(s.drift), b = gain(s.diffusion[0]), c = gain(s.driver[0]);
    if (!a || !b || !c) return std::nullopt;
    return GeometricParams{*a, *b, *c, model.initial.value[0]};
}

// ---------------------------------------------------------------------------
// Shared machinery

namespace {

struct Drivers {
    GridPath wiener;
    GridPath driver;
};

class DriverSource {
public:
    DriverSource(const ModelConfig& model, std::size_t finest_steps)
        : steps_(finest_steps),
          horizon_(model.horizon),
          wiener_dim_(model.coefficients.wiener_dim),
          driver_dim_(model.coefficients.driver_dim),
          sampler_(fbm::FbmParams{model.holder.hurst, std::max<std::size_t>(finest_steps, 2), model.horizon,
                                  resolve_method(model.driver_method, finest_steps)}) {
        if (finest_steps < 2) throw ConstraintError("driver grid needs at least 2 steps");
    }

    Drivers draw(std::uint64_t master, std::size_t replica) const {
        const SeedSpec seed{master, replica};
        return {fbm::sample_wiener(steps_, horizon_, wiener_dim_, seed), sampler_.sample(seed, driver_dim_)};
    }

    std::size_t steps() const noexcept { return steps_; }

private:
    std::size_t steps_;
    double horizon_;
    std::size_t wiener_dim_;
    std::size_t driver_dim_;
    fbm::FbmSampler sampler_;
};

GridPath solve(const CoefficientSpec& spec, const InitialCondition& eta, const Drivers& d,
               const solver::SolverConfig& cfg, std::size_t replica, const std::string& level) {
    try {
        return solver::euler_mixed_sdde(spec, eta, d.wiener, d.driver, cfg);
    } catch (const ExplosionError& e) {
        throw ExplosionError("replica " + std::to_string(replica) + ", level " + level + ": " + e.what(), e.step(),
                             e.time());
    }
}

}  // namespace

GridPath solve_model(const ModelConfig& model, std::uint64_t seed, std::size_t replica) {
    model.validate();
    const DriverSource source(model, model.steps);
    const Drivers d = source.draw(seed, replica);
    const auto scfg = model.solver_config(model.steps);
    const InitialCondition eta = model.initial_condition(model.dt());
    if (model.scheme == solver::Scheme::kEulerIto) {
        const auto sys = solver::mollified_ito_system(model.coefficients, model.dt(), model.mollifier_level);
        return solver::euler_ito_sdde(sys, eta, d.wiener, d.driver, scfg);
    }
    return solver::euler_mixed_sdde(model.coefficients, eta, d.wiener, d.driver, scfg);
}

namespace {

AssumptionReport assumptions_for(const ExperimentConfig& cfg, const CoefficientSpec& spec) {
    AssumptionCheckOptions opt;
    opt.sample_budget = cfg.assumption_samples;
    opt.horizon = cfg.model.horizon;
    opt.seed = SeedSpec{cfg.seed, 0};
    opt.initial = cfg.model.initial_condition(cfg.model.dt());
    return check_assumptions(spec, cfg.model.holder, opt);
}

// Runs per-replica work producing one distance per level and assembles the report.
ConvergenceReport assemble(const ExperimentConfig& cfg, std::size_t workers, std::size_t finest_steps,
                           std::string reference,
                           const std::function<std::vector<double>(std::size_t, const Drivers&)>& replica_fn) {
    const DriverSource source(cfg.model, finest_steps);
    const std::size_t levels = cfg.levels.size();
    std::vector<std::vector<double>> per_replica(cfg.replicas);
    parallel_for(cfg.replicas, workers, [&](std::size_t i) {
        const Drivers d = source.draw(cfg.seed, i);
        per_replica[i] = replica_fn(i, d);
    });

    ConvergenceReport report;
    report.kind = cfg.kind;
    report.seed = cfg.seed;
    report.replicas = cfg.replicas;
    report.epsilon = cfg.epsilon;
    report.finest_steps = finest_steps;
    report.reference = std::move(reference);
    for (std::size_t l = 0; l < levels; ++l) {
        LevelResult lr;
        lr.level = cfg.levels[l];
        lr.distances.reserve(cfg.replicas);
        for (std::size_t i = 0; i < cfg.replicas; ++i) lr.distances.push_back(per_replica[i][l]);
        lr.exceedance = estimate_exceedance(lr.distances, cfg.epsilon);
        lr.distance = stats::summarize(lr.distances);
        report.levels.push_back(std::move(lr));
    }
    if (levels >= 2) {
        std::vector<double> lx, ly;
        bool positive = true;
        for (const auto& lr : report.levels) {
            if (!(lr.distance.mean > 0.0)) positive = false;
            lx.push_back(std::log(lr.level));
            ly.push_back(std::log(lr.distance.mean));
        }
        if (positive) report.slope = stats::ls_slope(lx, ly);
    }
    return report;
}

void evaluate(const Criteria& c, ConvergenceReport& r) {
    auto add = [&](std::string name, bool ok, std::string detail) {
        r.criteria.push_back({std::move(name), ok, std::move(detail)});
    };
    const auto& lv = r.levels;
    if (c.finest_exceedance_below) {
        const auto& last = lv.back().exceedance;
        add("finest_exceedance_below", last.estimate < *c.finest_exceedance_below,
            "P(sup distance > eps) at level " + fmt(lv.back().level) + " = " + fmt(last.estimate) + " (limit " +
                fmt(*c.finest_exceedance_below) + ")");
    }
    if (c.exceedance_nonincreasing && *c.exceedance_nonincreasing) {
        bool ok = true;
        std::string detail = "no strict increase with disjoint intervals";
        for (std::size_t i = 0; i < lv.size() && ok; ++i)
            for (std::size_t j = i + 1; j < lv.size(); ++j)
                if (lv[j].exceedance.lower > lv[i].exceedance.upper) {
                    ok = false;
                    detail = "level " + fmt(lv[j].level) + " interval lies above level " + fmt(lv[i].level);
                    break;
                }
        add("exceedance_nonincreasing", ok, detail);
    }
    if (c.zero_distance && *c.zero_distance) {
        bool ok = true;
        for (const auto& l : lv)
            for (double d : l.distances) ok = ok && d == 0.0;
        add("zero_distance", ok, ok ? "every distance is exactly 0" : "non-zero distance found");
    }
    if (c.mean_nonincreasing_at_least) {
        std::size_t good = 0;
        for (std::size_t i = 1; i < lv.size(); ++i)
            if (lv[i].distance.mean <= lv[i - 1].distance.mean) ++good;
        add("mean_nonincreasing_at_least", good >= *c.mean_nonincreasing_at_least,
            std::to_string(good) + " of " + std::to_string(lv.size() - 1) + " comparisons non-increasing (need " +
                std::to_string(*c.mean_nonincreasing_at_least) + ")");
    }
    if (c.mean_strictly_decreasing && *c.mean_strictly_decreasing) {
        bool ok = true;
        for (std::size_t i = 1; i < lv.size(); ++i) ok = ok && lv[i].distance.mean < lv[i - 1].distance.mean;
        add("mean_strictly_decreasing", ok, ok ? "mean distance strictly decreasing" : "mean distance not decreasing");
    }
    if (c.slope_target) {
        const double tol = c.slope_tolerance.value_or(0.3);
        const bool ok = r.slope && std::abs(*r.slope - *c.slope_target) <= tol;
        add("slope", ok,
            r.slope ? "log-log slope " + fmt(*r.slope) + " vs target " + fmt(*c.slope_target) + " +/- " + fmt(tol)
                    : "slope undefined (zero mean distance)");
    }
    if (c.assumptions_hold && *c.assumptions_hold)
        add("assumptions_hold", r.assumptions.all_passed(), "randomized H1-H5 checks");
}

solver::SolverConfig with_steps(const ModelConfig& m, std::size_t n) { return m.solver_config(n); }

CoefficientSpec perturbed(const CoefficientSpec& base, Perturbation p, double n) {
    CoefficientSpec s = base;
    const double eps = 1.0 / n;
    const auto d = static_cast<Eigen::Index>(s.state_dim);
    switch (p) {
        case Perturbation::kDriftShift:
            if (s.drift.offset.size() == 0) s.drift.offset = Eigen::VectorXd::Zero(d);
            s.drift.offset.array() += eps;
            break;
        case Perturbation::kGainShift: {
            auto scale = [&](ColumnMap& m) {
                m.now *= 1.0 + eps;
                m.lagged *= 1.0 + eps;
                m.distributed *= 1.0 + eps;
            };
            scale(s.drift);
            for (auto& m : s.diffusion) scale(m);
            for (auto& m : s.driver) scale(m);
            break;
        }
        case Perturbation::kNone:
        case Perturbation::kInitialShift:
            break;
    }
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Convergence experiments

ConvergenceReport run_coefficient_convergence(const ExperimentConfig& cfg, std::size_t workers) {
    cfg.validate();
    const ModelConfig& m = cfg.model;
    const auto scfg = with_steps(m, m.steps);
    const InitialCondition eta0 = m.initial_condition(m.dt());
    std::vector<CoefficientSpec> specs;
    std::vector<InitialCondition> etas;
    for (double n : cfg.levels) {
        specs.push_back(perturbed(m.coefficients, cfg.perturbation, n));
        etas.push_back(cfg.perturbation == Perturbation::kInitialShift
                           ? make_initial_condition(m.initial.shifted(1.0 / n), m.delay, m.dt(), m.holder.theta)
                           : eta0);
    }
    auto report = assemble(cfg, workers, m.steps, "unperturbed equation", [&](std::size_t i, const Drivers& d) {
        const GridPath x0 = solve(m.coefficients, eta0, d, scfg, i, "reference");
        std::vector<double> out;
        for (std::size_t l = 0; l < cfg.levels.size(); ++l)
            out.push_back(sup_distance(solve(specs[l], etas[l], d, scfg, i, fmt(cfg.levels[l])), x0));
        return out;
    });
    report.assumptions = assumptions_for(cfg, m.coefficients);
    evaluate(cfg.criteria, report);
    return report;
}

ConvergenceReport run_vanishing_delay(const ExperimentConfig& cfg, std::size_t workers) {
    cfg.validate();
    const ModelConfig& m = cfg.model;
    const auto scfg = with_steps(m, m.steps);
    const InitialCondition eta = m.initial_condition(m.dt());
    const CoefficientSpec limit = m.coefficients.without_delay();
    std::vector<CoefficientSpec> specs;
    for (double tau : cfg.levels) specs.push_back(m.coefficients.with_tap(tau));
    auto report = assemble(cfg, workers, m.steps, "equation without delay", [&](std::size_t i, const Drivers& d) {
        const GridPath x0 = solve(limit, eta, d, scfg, i, "reference");
        std::vector<double> out;
        for (std::size_t l = 0; l < specs.size(); ++l)
            out.push_back(sup_distance(solve(specs[l], eta, d, scfg, i, fmt(cfg.levels[l])), x0));
        return out;
    });
    report.assumptions = assumptions_for(cfg, m.coefficients);
    evaluate(cfg.criteria, report);
    return report;
}

ConvergenceReport run_euler_refinement(const ExperimentConfig& cfg, std::size_t workers) {
    cfg.validate();
    const ModelConfig& m = cfg.model;
    const auto finest = static_cast<std::size_t>(cfg.levels.back());
    const auto geometric = as_geometric(m);
    const std::size_t reference_steps = geometric ? finest : 4 * finest;
    std::vector<InitialCondition> etas;
    for (double n : cfg.levels) etas.push_back(m.initial_condition(m.horizon / n));
    const InitialCondition eta_ref = m.initial_condition(m.horizon / static_cast<double>(reference_steps));
    const std::string reference = geometric ? "closed form" : "euler scheme on a 4x finer mesh (self-referential proxy)";

    auto report = assemble(cfg, workers, reference_steps, reference, [&](std::size_t i, const Drivers& d) {
        GridPath ref;
        std::size_t ref_offset = 0;
        if (geometric) {
            ref = solver::geometric_closed_form(geometric->a, geometric->b, geometric->c, geometric->x0, d.wiener,
                                                d.driver);
        } else {
            const auto rc = with_steps(m, reference_steps);
            ref = solve(m.coefficients, eta_ref, d, rc, i, "reference");
            ref_offset = rc.delay_steps();
        }
        const GridPath ref_t = ref.slice(ref_offset, ref.size() - ref_offset);
        std::vector<double> out;
        for (std::size_t l = 0; l < cfg.levels.size(); ++l) {
            const auto n = static_cast<std::size_t>(cfg.levels[l]);
            const auto sc = with_steps(m, n);
            const GridPath x = solve(m.coefficients, etas[l], d, sc, i, fmt(cfg.levels[l]));
            const std::size_t off = sc.delay_steps();
            out.push_back(sup_distance(x.slice(off, x.size() - off), ref_t));
        }
        return out;
    });
    report.assumptions = assumptions_for(cfg, m.coefficients);
    evaluate(cfg.criteria, report);
    return report;
}

ConvergenceReport run_ito_limit(const ExperimentConfig& cfg, std::size_t workers) {
    cfg.validate();
    const ModelConfig& m = cfg.model;
    const auto scfg = with_steps(m, m.steps);
    const InitialCondition eta = m.initial_condition(m.dt());
    auto report = assemble(cfg, workers, m.steps, "mixed equation (euler scheme)", [&](std::size_t i, const Drivers& d) {
        const GridPath x = solve(m.coefficients, eta, d, scfg, i, "reference");
        std::vector<double> out;
        for (double level : cfg.levels) {
            const auto sys = solver::mollified_ito_system(m.coefficients, m.dt(), static_cast<std::size_t>(level));
            GridPath y;
            try {
                y = solver::euler_ito_sdde(sys, eta, d.wiener, d.driver, scfg);
            } catch (const ExplosionError& e) {
                throw ExplosionError("replica " + std::to_string(i) + ", level " + fmt(level) + ": " + e.what(),
                                     e.step(), e.time());
            }
            out.push_back(sup_distance(y, x));
        }
        return out;
    });
    report.assumptions = assumptions_for(cfg, m.coefficients);
    evaluate(cfg.criteria, report);
    return report;
}

// ---------------------------------------------------------------------------
// Moments

MomentReport estimate_moments(const ExperimentConfig& cfg, std::size_t workers) {
    cfg.validate();
    const ModelConfig& m = cfg.model;
    const auto scfg = with_steps(m, m.steps);
    const InitialCondition eta = m.initial_condition(m.dt());
    const std::size_t r_steps = scfg.delay_steps();
    const double alpha = m.holder.alpha;
    const DriverSource source(m, m.steps);

    struct Sample {
        double sup = 0.0, delay_norm = 0.0, driver_norm = 0.0, terminal = 0.0;
    };
    std::vector<Sample> samples(cfg.replicas);
    parallel_for(cfg.replicas, workers, [&](std::size_t i) {
        const Drivers d = source.draw(cfg.seed, i);
        const GridPath x = solve(m.coefficients, eta, d, scfg, i, "moments");
        Sample s;
        s.sup = x.slice(r_steps, x.size() - r_steps).sup_norm();
        s.delay_norm = frac::delay_norms(x, alpha, m.horizon).norm_t;
        s.driver_norm = frac::seminorm_0_alpha(d.driver, alpha);
        s.terminal = euclidean_norm(x.point(x.size() - 1));
        samples[i] = s;
    });

    MomentReport report;
    report.seed = cfg.seed;
    report.replicas = cfg.replicas;
    report.steps = m.steps;
    std::size_t inside = 0;
    for (const auto& s : samples)
        if (s.driver_norm <= cfg.truncation.driver_bound) ++inside;
    report.indicator_rate = static_cast<double>(inside) / static_cast<double>(cfg.replicas);
    const auto geometric = as_geometric(m);

    for (double p : cfg.levels) {
        MomentLevel ml;
        ml.p = p;
        std::vector<double> sup_p, trunc_p, term_p;
        for (const auto& s : samples) {
            sup_p.push_back(std::pow(s.sup, p));
            trunc_p.push_back(s.driver_norm <= cfg.truncation.driver_bound ? std::pow(s.delay_norm, p) : 0.0);
            term_p.push_back(std::pow(s.terminal, p));
        }
        ml.sup_power = stats::summarize(sup_p);
        ml.truncated_power = stats::summarize(trunc_p);
        ml.terminal_power = stats::summarize(term_p);
        ml.sup_lp_norm = std::pow(ml.sup_power.mean, 1.0 / p);
        const std::size_t half = cfg.replicas / 2;
        ml.half_sample_mean = stats::summarize(std::span<const double>(sup_p).first(half)).mean;
        ml.relative_change = ml.sup_power.mean > 0.0
                                 ? std::abs(ml.sup_power.mean - ml.half_sample_mean) / ml.sup_power.mean
                                 : 0.0;
        std::vector<double> sorted = sup_p;
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        const std::size_t top = std::max<std::size_t>(1, sorted.size() / 100);
        double top_sum = 0.0, total = 0.0;
        for (std::size_t k = 0; k < sorted.size(); ++k) {
            if (k < top) top_sum += sorted[k];
            total += sorted[k];
        }
        ml.top_share = total > 0.0 ? top_sum / total : 0.0;
        ml.heavy_tail = ml.top_share > 0.5;
        if (geometric) {
            const auto& g = *geometric;
            const double t = m.horizon;
            const double t2h = std::pow(t, 2.0 * m.holder.hurst);
            ml.oracle = std::pow(std::abs(g.x0), p) *
                        std::exp(p * g.a * t + 0.5 * p * (p - 1.0) * g.b * g.b * t + 0.5 * p * p * g.c * g.c * t2h);
        }
        report.levels.push_back(std::move(ml));
    }

    std::vector<double> sups;
    for (const auto& s : samples) sups.push_back(s.sup);
    std::sort(sups.begin(), sups.end());
    const std::size_t points = std::min<std::size_t>(50, sups.size());
    for (std::size_t q = 0; q < points; ++q) {
        const std::size_t idx = q * (sups.size() - 1) / std::max<std::size_t>(points - 1, 1);
        report.survival_x.push_back(sups[idx]);
        report.survival_p.push_back(static_cast<double>(sups.size() - 1 - idx) / static_cast<double>(sups.size()));
    }

    report.assumptions = assumptions_for(cfg, m.coefficients);

    const Criteria& c = cfg.criteria;
    auto add = [&](std::string name, bool ok, std::string detail) {
        report.criteria.push_back({std::move(name), ok, std::move(detail)});
    };
    const double k_se = c.oracle_within_se.value_or(3.0);
    for (const auto& ml : report.levels) {
        const std::string tag = "p=" + fmt(ml.p);
        if (c.oracle_within_se && ml.oracle && ml.p == 2.0) {
            const double dev = std::abs(ml.terminal_power.mean - *ml.oracle);
            add("oracle_within_se", dev <= k_se * ml.terminal_power.standard_error,
                tag + ": terminal moment " + fmt(ml.terminal_power.mean) + " vs oracle " + fmt(*ml.oracle) +
                    " (SE " + fmt(ml.terminal_power.standard_error) + ")");
        }
        if (c.sup_moment_dominates_oracle && *c.sup_moment_dominates_oracle && ml.oracle && ml.p == 2.0) {
            add("sup_moment_dominates_oracle", ml.sup_power.mean >= *ml.oracle - k_se * ml.sup_power.standard_error,
                tag + ": sup moment " + fmt(ml.sup_power.mean) + " vs oracle " + fmt(*ml.oracle));
        }
        if (c.stability_below && ml.p == 4.0) {
            add("stability_below", ml.relative_change < *c.stability_below,
                tag + ": relative change from M/2 to M is " + fmt(ml.relative_change));
        }
        if (c.fail_on_heavy_tail && *c.fail_on_heavy_tail) {
            add("heavy_tail", !ml.heavy_tail, tag + ": top 1% share " + fmt(ml.top_share));
        }
    }
    if (c.oracle_within_se && !std::any_of(report.levels.begin(), report.levels.end(),
                                           [](const MomentLevel& l) { return l.oracle && l.p == 2.0; }))
        add("oracle_within_se", false, "no p=2 level with a closed-form oracle");
    if (c.stability_below && !std::any_of(report.levels.begin(), report.levels.end(),
                                          [](const MomentLevel& l) { return l.p == 4.0; }))
        add("stability_below", false, "no p=4 level in the schedule");
    if (c.assumptions_hold && *c.assumptions_hold)
        add("assumptions_hold", report.assumptions.all_passed(), "randomized H1-H5 checks");
    return report;
}

// ---------------------------------------------------------------------------
// Quasi-contractivity

QuasiReport estimate_quasi_contractivity(const ExperimentConfig& cfg, std::size_t workers) {
    cfg.validate();
    const ModelConfig& m = cfg.model;
    const auto scfg = with_steps(m, m.steps);
    const InitialCondition eta = m.initial_condition(m.dt());
    const double alpha = m.holder.alpha;
    const int p = cfg.power.value_or(m.holder.quasi_contraction_power());
    const double pd = static_cast<double>(p);
    const double mb = cfg.truncation.driver_bound;
    const double rb = cfg.truncation.solution_bound;
    const DriverSource source(m, m.steps);
    const std::size_t levels = cfg.levels.size();

    struct Cell {
        double num = 0.0, den = 0.0;
        bool inside = false;
    };
    std::vector<std::vector<Cell>> cells(cfg.replicas);
    parallel_for(cfg.replicas, workers, [&](std::size_t i) {
        const Drivers d = source.draw(cfg.seed, i);
        const GridPath y1 = solve(m.coefficients, eta, d, scfg, i, "unperturbed");
        const double z1_norm = frac::seminorm_0_alpha(d.driver, alpha);
        const double y1_norm = frac::delay_norms(y1, alpha, m.horizon).norm_t;
        std::vector<Cell> row;
        for (std::size_t l = 0; l < levels; ++l) {
            const double eps = cfg.levels[l];
            Drivers d2 = d;
            GridPath shift = GridPath::zeros(0.0, d.driver.dt(), d.driver.size(), d.driver.dim());
            for (std::size_t k = 0; k < d2.driver.size(); ++k)
                for (std::size_t j = 0; j < d2.driver.dim(); ++j) {
                    shift(k, j) = eps * d.driver.time(k);
                    d2.driver(k, j) += shift(k, j);
                }
            const GridPath y2 = solve(m.coefficients, eta, d2, scfg, i, fmt(eps));
            const double z2_norm = frac::seminorm_0_alpha(d2.driver, alpha);
            const double y2_norm = frac::delay_norms(y2, alpha, m.horizon).norm_t;
            Cell c;
            c.inside = z1_norm <= mb && z2_norm <= mb && y1_norm <= rb && y2_norm <= rb;
            if (c.inside) {
                c.num = std::pow(sup_distance(y1, y2), pd);
                c.den = std::pow(frac::seminorm_0_alpha(shift, alpha), pd);
            }
            row.push_back(c);
        }
        cells[i] = std::move(row);
    });

    QuasiReport report;
    report.seed = cfg.seed;
    report.replicas = cfg.replicas;
    report.power = p;
    for (std::size_t l = 0; l < levels; ++l) {
        QuasiLevel q;
        q.perturbation = cfg.levels[l];
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < cfg.replicas; ++i) {
            const Cell& c = cells[i][l];
            if (!c.inside) continue;
            ++q.in_event;
            num += c.num;
            den += c.den;
        }
        const double n = static_cast<double>(cfg.replicas);
        q.numerator = num / n;
        q.denominator = den / n;
        if (q.in_event == 0) report.inconclusive = true;
        if (q.denominator > 0.0) q.ratio = q.numerator / q.denominator;
        report.levels.push_back(q);
    }
    std::vector<double> ratios;
    for (const auto& q : report.levels)
        if (q.ratio) ratios.push_back(*q.ratio);
    if (!ratios.empty()) {
        const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
        if (*lo > 0.0) report.spread = *hi / *lo;
        // Levels are ordered by shrinking perturbation.
        const double limit = cfg.criteria.ratio_spread_below.value_or(10.0);
        report.unbounded_growth = ratios.size() >= 2 && ratios.front() > 0.0 && ratios.back() / ratios.front() > limit;
    }
    report.assumptions = assumptions_for(cfg, m.coefficients);

    const Criteria& c = cfg.criteria;
    if (c.ratio_spread_below) {
        const bool ok = !report.inconclusive && report.spread && *report.spread < *c.ratio_spread_below &&
                        !report.unbounded_growth;
        report.criteria.push_back({"ratio_spread_below", ok,
                                   report.spread ? "max/min ratio " + fmt(*report.spread) + " (limit " +
                                                       fmt(*c.ratio_spread_below) + ")"
                                                 : std::string("ratio not applicable")});
    }
    if (c.assumptions_hold && *c.assumptions_hold)
        report.criteria.push_back({"assumptions_hold", report.assumptions.all_passed(), "randomized H1-H5 checks"});
    return report;
}

}  // namespace mixsdde::exp
