#include "mixsdde/model.hpp"

#include <cmath>
#include <sstream>

#include "mixsdde/errors.hpp"
#include "mixsdde/fbm.hpp"
#include "mixsdde/segment.hpp"

namespace mixsdde {

namespace {

std::string open_interval(double lo, double hi) {
    std::ostringstream os;
    os << '(' << lo << ", " << hi << ')';
    return os.str();
}

void require_in(double value, double lo, double hi, const char* name) {
    if (!(value > lo && value < hi))
        throw ConstraintError(std::string(name) + " must lie in " + open_interval(lo, hi) + ", got " +
                              std::to_string(value));
}

}  // namespace

void HolderParams::validate() const {
    if (!(hurst > 0.5)) throw ConstraintError("hurst must exceed 1/2");
    if (!(hurst < 1.0)) throw ConstraintError("hurst must be below 1");
    if (!(gamma > 0.5)) throw ConstraintError("gamma must exceed 1/2");
    if (!(gamma < hurst)) throw ConstraintError("gamma must be below hurst");
    require_in(alpha, 1.0 - gamma, 0.5, "alpha");
    require_in(beta, 1.0 - gamma, 1.0, "beta");
    require_in(theta, 1.0 - gamma, 0.5, "theta");
}

int HolderParams::quasi_contraction_power() const {
    const double bound = 4.0 / (1.0 - 2.0 * alpha);
    int p = static_cast<int>(std::ceil(bound - 1e-12));
    if (p % 2 != 0) ++p;
    return p;
}

std::string_view to_string(InitialKind kind) noexcept {
    switch (kind) {
        case InitialKind::kConstant: return "constant";
        case InitialKind::kLinear: return "linear";
        case InitialKind::kHolder: return "holder";
    }
    return "constant";
}

InitialKind initial_kind_from_string(std::string_view s) {
    if (s == "constant") return InitialKind::kConstant;
    if (s == "linear") return InitialKind::kLinear;
    if (s == "holder") return InitialKind::kHolder;
    throw ConstraintError("unknown initial condition kind '" + std::string(s) + "'");
}

void InitialSpec::validate(std::size_t dim) const {
    if (value.size() != dim)
        throw ConstraintError("initial value has " + std::to_string(value.size()) + " components, expected " +
                              std::to_string(dim));
    if (kind == InitialKind::kLinear && slope.size() != dim)
        throw ConstraintError("linear initial condition needs a slope with " + std::to_string(dim) + " components");
    if (kind == InitialKind::kHolder && amplitude.size() != dim)
        throw ConstraintError("holder initial condition needs an amplitude with " + std::to_string(dim) +
                              " components");
    for (double v : value)
        if (!std::isfinite(v)) throw ConstraintError("initial value must be finite");
}

InitialSpec InitialSpec::shifted(double shift) const {
    InitialSpec out = *this;
    for (double& v : out.value) v += shift;
    return out;
}

double InitialCondition::holder_constant() const {
    if (eta.size() < 2) return 0.0;
    return fbm::holder_seminorm(eta, holder_theta);
}

InitialCondition make_initial_condition(const InitialSpec& spec, double delay, double dt, double theta) {
    spec.validate(spec.value.size());
    if (spec.value.empty()) throw ConstraintError("initial value must have at least one component");
    const std::size_t steps = steps_of(delay, dt, "delay r");
    const std::size_t d = spec.value.size();
    GridPath eta = GridPath::zeros(-static_cast<double>(steps) * dt, dt, steps + 1, d);
    for (std::size_t k = 0; k <= steps; ++k) {
        // u = -(steps - k) dt; the last node is exactly 0.
        const double u = -static_cast<double>(steps - k) * dt;
        for (std::size_t j = 0; j < d; ++j) {
            double v = spec.value[j];
            if (spec.kind == InitialKind::kLinear) v += spec.slope[j] * u;
            if (spec.kind == InitialKind::kHolder) v += spec.amplitude[j] * std::pow(-u, theta);
            eta(k, j) = v;
        }
    }
    return {std::move(eta), theta};
}

}  // namespace mixsdde
