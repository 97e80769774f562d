#include "mixsdde/coefficients.hpp"

#include <algorithm>
#include <string>

#include "mixsdde/errors.hpp"

namespace mixsdde {

namespace {

double spectral_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    if (m.size() == 1) return std::abs(m(0, 0));
    return Eigen::JacobiSVD<Eigen::MatrixXd>(m).singularValues()(0);
}

// Sum of the gain norms of a column map (its Lipschitz constant in psi when phi is 1-Lipschitz).
double gain_norm(const ColumnMap& map) {
    return spectral_norm(map.now) + spectral_norm(map.lagged) + spectral_norm(map.distributed);
}

double offset_norm(const ColumnMap& map) { return map.offset.size() == 0 ? 0.0 : map.offset.norm(); }

void check_shape(const ColumnMap& map, std::size_t d, const std::string& where) {
    const auto n = static_cast<Eigen::Index>(d);
    if (map.offset.size() != 0 && map.offset.size() != n)
        throw ConstraintError(where + ": offset must have " + std::to_string(d) + " components");
    for (const auto* m : {&map.now, &map.lagged, &map.distributed})
        if (m->size() != 0 && (m->rows() != n || m->cols() != n))
            throw ConstraintError(where + ": gain matrices must be " + std::to_string(d) + " x " + std::to_string(d));
    if (!std::isfinite(map.time.frequency)) throw ConstraintError(where + ": time factor frequency must be finite");
}

template <class F>
void for_each_map(const CoefficientSpec& spec, F&& f) {
    f(spec.drift, std::string("drift"));
    for (std::size_t i = 0; i < spec.diffusion.size(); ++i) f(spec.diffusion[i], "diffusion[" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < spec.driver.size(); ++i) f(spec.driver[i], "driver[" + std::to_string(i) + "]");
}

void add_into(Eigen::MatrixXd& target, const Eigen::MatrixXd& extra) {
    if (extra.size() == 0) return;
    if (target.size() == 0) target = extra;
    else target += extra;
}

}  // namespace

std::string_view to_string(Family f) noexcept {
    switch (f) {
        case Family::kConstant: return "constant";
        case Family::kNoDelay: return "no_delay";
        case Family::kLinear: return "linear";
        case Family::kPointwiseDelay: return "pointwise_delay";
        case Family::kDistributedDelay: return "distributed_delay";
    }
    return "linear";
}

std::string_view to_string(Nonlinearity n) noexcept {
    switch (n) {
        case Nonlinearity::kIdentity: return "identity";
        case Nonlinearity::kSin: return "sin";
        case Nonlinearity::kTanh: return "tanh";
    }
    return "identity";
}

std::string_view to_string(TimeFactorKind k) noexcept {
    switch (k) {
        case TimeFactorKind::kNone: return "none";
        case TimeFactorKind::kSin: return "sin";
        case TimeFactorKind::kCos: return "cos";
    }
    return "none";
}

std::string_view to_string(KernelKind k) noexcept { return k == KernelKind::kUniform ? "uniform" : "exponential"; }

Family family_from_string(std::string_view s) {
    for (auto f : {Family::kConstant, Family::kNoDelay, Family::kLinear, Family::kPointwiseDelay,
                   Family::kDistributedDelay})
        if (to_string(f) == s) return f;
    throw ConstraintError("unknown coefficient family '" + std::string(s) + "'");
}

Nonlinearity nonlinearity_from_string(std::string_view s) {
    for (auto n : {Nonlinearity::kIdentity, Nonlinearity::kSin, Nonlinearity::kTanh})
        if (to_string(n) == s) return n;
    throw ConstraintError("unknown nonlinearity '" + std::string(s) + "'");
}

TimeFactorKind time_factor_from_string(std::string_view s) {
    for (auto k : {TimeFactorKind::kNone, TimeFactorKind::kSin, TimeFactorKind::kCos})
        if (to_string(k) == s) return k;
    throw ConstraintError("unknown time factor '" + std::string(s) + "'");
}

KernelKind kernel_from_string(std::string_view s) {
    if (s == "uniform") return KernelKind::kUniform;
    if (s == "exponential") return KernelKind::kExponential;
    throw ConstraintError("unknown delay kernel '" + std::string(s) + "'");
}

double TimeFactor::operator()(double t) const noexcept {
    switch (kind) {
        case TimeFactorKind::kNone: return 1.0;
        case TimeFactorKind::kSin: return std::sin(frequency * t);
        case TimeFactorKind::kCos: return std::cos(frequency * t);
    }
    return 1.0;
}

double DelayKernel::weight(double u, double window) const noexcept {
    if (kind == KernelKind::kUniform) return 1.0 / window;
    return rate * std::exp(rate * u) / -std::expm1(-rate * window);
}

bool ColumnMap::is_zero() const {
    auto zero = [](const auto& m) { return m.size() == 0 || m.isZero(0.0); };
    return zero(offset) && zero(now) && zero(lagged) && zero(distributed);
}

double apply_nonlinearity(Nonlinearity n, double x) noexcept {
    switch (n) {
        case Nonlinearity::kIdentity: return x;
        case Nonlinearity::kSin: return std::sin(x);
        case Nonlinearity::kTanh: return std::tanh(x);
    }
    return x;
}

double nonlinearity_derivative(Nonlinearity n, double x) noexcept {
    switch (n) {
        case Nonlinearity::kIdentity: return 1.0;
        case Nonlinearity::kSin: return std::cos(x);
        case Nonlinearity::kTanh: {
            const double th = std::tanh(x);
            return 1.0 - th * th;
        }
    }
    return 1.0;
}

double nonlinearity_curvature(Nonlinearity n) noexcept {
    switch (n) {
        case Nonlinearity::kIdentity: return 0.0;
        case Nonlinearity::kSin: return 1.0;
        case Nonlinearity::kTanh: return 4.0 / (3.0 * std::sqrt(3.0));  // max |2 tanh sech^2|
    }
    return 0.0;
}

void CoefficientSpec::validate() const {
    if (state_dim == 0) throw ConstraintError("state dimension must be positive");
    if (wiener_dim == 0) throw ConstraintError("wiener dimension must be positive");
    if (driver_dim == 0) throw ConstraintError("driver dimension must be positive");
    if (diffusion.size() != wiener_dim)
        throw ConstraintError("diffusion must have " + std::to_string(wiener_dim) + " columns, got " +
                              std::to_string(diffusion.size()));
    if (driver.size() != driver_dim)
        throw ConstraintError("driver coefficient must have " + std::to_string(driver_dim) + " columns, got " +
                              std::to_string(driver.size()));
    if (!(tap >= 0.0) || !std::isfinite(tap)) throw ConstraintError("delay tap must be a finite non-negative number");
    if (kernel.kind == KernelKind::kExponential && !(kernel.rate > 0.0))
        throw ConstraintError("exponential kernel rate must be positive");

    const std::string fam(to_string(family));
    for_each_map(*this, [&](const ColumnMap& map, const std::string& where) {
        check_shape(map, state_dim, where);
        auto forbid = [&](const Eigen::MatrixXd& m, const char* what) {
            if (m.size() != 0) throw ConstraintError(fam + " family does not allow " + what + " gains (" + where + ")");
        };
        switch (family) {
            case Family::kConstant:
                forbid(map.now, "state");
                forbid(map.lagged, "delayed");
                forbid(map.distributed, "distributed");
                if (map.time.kind != TimeFactorKind::kNone)
                    throw ConstraintError("constant family does not allow a time factor (" + where + ")");
                break;
            case Family::kNoDelay:
                forbid(map.lagged, "delayed");
                forbid(map.distributed, "distributed");
                break;
            case Family::kLinear:
            case Family::kPointwiseDelay:
                forbid(map.distributed, "distributed");
                break;
            case Family::kDistributedDelay:
                forbid(map.lagged, "delayed");
                break;
        }
    });
    if (family == Family::kLinear && nonlinearity != Nonlinearity::kIdentity)
        throw ConstraintError("linear family requires the identity nonlinearity");
}

CoefficientSpec CoefficientSpec::without_delay() const {
    CoefficientSpec out = *this;
    auto collapse = [](ColumnMap& map) {
        add_into(map.now, map.lagged);
        add_into(map.now, map.distributed);
        map.lagged.resize(0, 0);
        map.distributed.resize(0, 0);
    };
    collapse(out.drift);
    for (auto& m : out.diffusion) collapse(m);
    for (auto& m : out.driver) collapse(m);
    out.tap = 0.0;
    if (family != Family::kConstant) out.family = Family::kNoDelay;
    return out;
}

CoefficientSpec CoefficientSpec::with_tap(double new_tap) const {
    CoefficientSpec out = *this;
    out.tap = new_tap;
    return out;
}

bool CoefficientSpec::driver_is_zero() const {
    return std::all_of(driver.begin(), driver.end(), [](const ColumnMap& m) { return m.is_zero(); });
}

CoefficientSpec CoefficientSpec::geometric(double a, double b, double c) {
    CoefficientSpec s;
    s.family = Family::kNoDelay;
    auto gain = [](double g) {
        ColumnMap m;
        m.now = Eigen::MatrixXd::Constant(1, 1, g);
        return m;
    };
    s.drift = gain(a);
    s.diffusion = {gain(b)};
    s.driver = {gain(c)};
    return s;
}

ClosedFormConstants closed_form_constants(const CoefficientSpec& spec, double beta, double horizon) {
    spec.validate();
    ClosedFormConstants k;
    double offsets = 0.0, gains = 0.0;
    for_each_map(spec, [&](const ColumnMap& map, const std::string&) {
        offsets += offset_norm(map);
        gains += gain_norm(map);
    });
    k.growth = std::max(offsets, gains);

    const double curvature = nonlinearity_curvature(spec.nonlinearity);
    double lip = gain_norm(spec.drift);
    for (const auto& m : spec.diffusion) lip += gain_norm(m);
    double holder = 0.0;
    const double time_scale = std::pow(horizon, 1.0 - beta);
    for (const auto& m : spec.driver) {
        const double g = gain_norm(m);
        k.derivative_bound += g;
        lip += g * curvature;
        holder += m.time.lipschitz() * time_scale * std::max(offset_norm(m), g);
    }
    k.lipschitz = lip;
    k.time_holder = holder;
    k.constant_k = std::max({k.growth, k.derivative_bound, k.time_holder});
    return k;
}

CoefficientEvaluator::CoefficientEvaluator(const CoefficientSpec& spec, double dt) : spec_(&spec), dt_(dt) {
    spec.validate();
    if (!(dt > 0.0)) throw DomainError("coefficient evaluator: dt must be positive");
    if (spec.required_history() > 0.0) tap_lag_ = steps_of(spec.tap, dt, "delay tap");
    if (spec.family == Family::kDistributedDelay) {
        kernel_weights_.assign(tap_lag_ + 1, 0.0);
        if (tap_lag_ == 0) {
            kernel_weights_[0] = 1.0;
        } else {
            double total = 0.0;
            for (std::size_t lag = 0; lag <= tap_lag_; ++lag) {
                const double end = (lag == 0 || lag == tap_lag_) ? 0.5 : 1.0;
                kernel_weights_[lag] = end * dt * spec.kernel.weight(-static_cast<double>(lag) * dt, spec.tap);
                total += kernel_weights_[lag];
            }
            // Normalize so constant segments integrate exactly.
            for (double& w : kernel_weights_) w /= total;
        }
    }
    const auto d = static_cast<Eigen::Index>(spec.state_dim);
    phi_now_.resize(d);
    phi_lag_.resize(d);
    phi_dist_.resize(d);
}

void CoefficientEvaluator::load(const Segment& psi) {
    const auto& spec = *spec_;
    if (psi.dim() != spec.state_dim)
        throw DomainError("coefficient: segment has dimension " + std::to_string(psi.dim()) + ", expected " +
                          std::to_string(spec.state_dim));
    if (psi.steps() < tap_lag_) throw DomainError("coefficient: segment window is shorter than the delay tap");
    if (std::abs(psi.dt() - dt_) > 1e-12 * dt_) throw DomainError("coefficient: segment grid step mismatch");
    const Nonlinearity nl = spec.nonlinearity;
    const auto now = psi.now();
    const auto lag = psi.at_lag(tap_lag_);
    for (std::size_t i = 0; i < spec.state_dim; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        phi_now_[ii] = apply_nonlinearity(nl, now[i]);
        phi_lag_[ii] = apply_nonlinearity(nl, lag[i]);
        phi_dist_[ii] = 0.0;
    }
    for (std::size_t l = 0; l < kernel_weights_.size(); ++l) {
        const auto p = psi.at_lag(l);
        for (std::size_t i = 0; i < spec.state_dim; ++i)
            phi_dist_[static_cast<Eigen::Index>(i)] += kernel_weights_[l] * apply_nonlinearity(nl, p[i]);
    }
    loaded_.emplace(psi);
}

void CoefficientEvaluator::apply(const ColumnMap& map, double t, std::span<double> out) const {
    const std::size_t d = spec_->state_dim;
    Eigen::Map<Eigen::VectorXd> v(out.data(), static_cast<Eigen::Index>(d));
    if (map.offset.size() != 0) v = map.offset;
    else v.setZero();
    if (map.now.size() != 0) v.noalias() += map.now * phi_now_;
    if (map.lagged.size() != 0) v.noalias() += map.lagged * phi_lag_;
    if (map.distributed.size() != 0) v.noalias() += map.distributed * phi_dist_;
    if (map.time.kind != TimeFactorKind::kNone) v *= map.time(t);
}

void CoefficientEvaluator::drift(double t, std::span<double> out) const {
    if (!loaded_) throw DomainError("coefficient: no segment loaded");
    apply(spec_->drift, t, out.subspan(0, spec_->state_dim));
}

void CoefficientEvaluator::diffusion(double t, std::span<double> out) const {
    if (!loaded_) throw DomainError("coefficient: no segment loaded");
    const std::size_t d = spec_->state_dim;
    for (std::size_t i = 0; i < spec_->diffusion.size(); ++i) apply(spec_->diffusion[i], t, out.subspan(i * d, d));
}

void CoefficientEvaluator::driver(double t, std::span<double> out) const {
    if (!loaded_) throw DomainError("coefficient: no segment loaded");
    const std::size_t d = spec_->state_dim;
    for (std::size_t i = 0; i < spec_->driver.size(); ++i) apply(spec_->driver[i], t, out.subspan(i * d, d));
}

void CoefficientEvaluator::evaluate(Which which, double t, std::span<double> out) const {
    switch (which) {
        case Which::kDrift: drift(t, out); return;
        case Which::kDiffusion: diffusion(t, out); return;
        case Which::kDriver: driver(t, out); return;
    }
}

void CoefficientEvaluator::apply_derivative(const ColumnMap& map, double t, const Segment& direction,
                                            std::span<double> out) const {
    const std::size_t d = spec_->state_dim;
    const Nonlinearity nl = spec_->nonlinearity;
    const Segment& psi = *loaded_;
    auto weighted = [&](std::size_t lag) {
        Eigen::VectorXd e(static_cast<Eigen::Index>(d));
        const auto p = psi.at_lag(lag);
        const auto q = direction.at_lag(lag);
        for (std::size_t i = 0; i < d; ++i) e[static_cast<Eigen::Index>(i)] = nonlinearity_derivative(nl, p[i]) * q[i];
        return e;
    };
    Eigen::Map<Eigen::VectorXd> v(out.data(), static_cast<Eigen::Index>(d));
    v.setZero();
    if (map.now.size() != 0) v.noalias() += map.now * weighted(0);
    if (map.lagged.size() != 0) v.noalias() += map.lagged * weighted(tap_lag_);
    if (map.distributed.size() != 0) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
        for (std::size_t l = 0; l < kernel_weights_.size(); ++l) acc += kernel_weights_[l] * weighted(l);
        v.noalias() += map.distributed * acc;
    }
    if (map.time.kind != TimeFactorKind::kNone) v *= map.time(t);
}

void CoefficientEvaluator::driver_derivative(double t, const Segment& direction, std::span<double> out) const {
    if (!loaded_) throw DomainError("coefficient: no segment loaded");
    if (direction.dim() != spec_->state_dim || direction.steps() < tap_lag_)
        throw DomainError("coefficient: direction does not match the loaded segment");
    const std::size_t d = spec_->state_dim;
    for (std::size_t i = 0; i < spec_->driver.size(); ++i)
        apply_derivative(spec_->driver[i], t, direction, out.subspan(i * d, d));
}

Eigen::MatrixXd eval_coefficient(const CoefficientSpec& spec, Which which, double t, const Segment& psi) {
    CoefficientEvaluator eval(spec, psi.dt());
    eval.load(psi);
    const auto d = static_cast<Eigen::Index>(spec.state_dim);
    const Eigen::Index cols = which == Which::kDrift       ? 1
                              : which == Which::kDiffusion ? static_cast<Eigen::Index>(spec.wiener_dim)
                                                           : static_cast<Eigen::Index>(spec.driver_dim);
    Eigen::MatrixXd out(d, cols);
    eval.evaluate(which, t, std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
    return out;
}

}  // namespace mixsdde
