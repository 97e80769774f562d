#include "mixsdde/solver.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "mixsdde/errors.hpp"
#include "mixsdde/mollifier.hpp"

namespace mixsdde::solver {

std::string_view to_string(Scheme s) noexcept { return s == Scheme::kEulerMixed ? "euler_mixed" : "euler_ito"; }

Scheme scheme_from_string(std::string_view s) {
    if (s == "euler_mixed") return Scheme::kEulerMixed;
    if (s == "euler_ito") return Scheme::kEulerIto;
    throw ConstraintError("unknown scheme '" + std::string(s) + "'");
}

std::size_t SolverConfig::delay_steps() const { return steps_of(delay, dt(), "delay r"); }

void SolverConfig::validate() const {
    if (n_steps < 1) throw ConstraintError("solver steps must be at least 1");
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConstraintError("horizon must be positive");
    if (!(explosion_threshold > 0.0)) throw ConstraintError("explosion threshold must be positive");
    try {
        delay_steps();
    } catch (const DomainError& e) {
        throw ConstraintError(e.what());
    }
}

GridPath restrict_to_grid(const GridPath& path, std::size_t n_steps, double horizon, const char* what) {
    if (path.empty() || std::abs(path.t0()) > 1e-12)
        throw DomainError(std::string(what) + " must be a path starting at t = 0");
    const std::size_t cells = path.size() - 1;
    if (cells < n_steps || cells % n_steps != 0)
        throw DomainError(std::string(what) + " has " + std::to_string(cells) +
                          " steps, not a refinement of the solver grid with " + std::to_string(n_steps));
    if (std::abs(path.end_time() - horizon) > 1e-9 * horizon)
        throw DomainError(std::string(what) + " does not end at the horizon");
    const std::size_t stride = cells / n_steps;
    return stride == 1 ? path : path.restrict_to(stride);
}

namespace {

GridPath initial_on_grid(const InitialCondition& eta, std::size_t delay_steps, double dt) {
    const GridPath& p = eta.eta;
    const double r = static_cast<double>(delay_steps) * dt;
    if (std::abs(p.end_time()) > 1e-9 * std::max(dt, 1.0) || std::abs(p.t0() + r) > 1e-9 * std::max(r, dt))
        throw DomainError("initial condition must cover exactly [-r, 0]");
    const std::size_t cells = p.size() - 1;
    if (delay_steps == 0) return p.slice(p.size() - 1, 1);
    if (cells % delay_steps != 0) throw DomainError("initial condition grid is not a refinement of the solver grid");
    return p.restrict_to(cells / delay_steps);
}

// x_next = x + a dt + sum_j b_j dW_j (+ sum_j c_j dZ_j).
void advance(std::span<const double> x, std::span<const double> a, std::span<const double> b,
             std::span<const double> dw, std::span<const double> c, std::span<const double> dz, double dt,
             std::span<double> next) {
    const std::size_t d = x.size();
    for (std::size_t i = 0; i < d; ++i) {
        double v = x[i] + a[i] * dt;
        for (std::size_t j = 0; j < dw.size(); ++j) v += b[j * d + i] * dw[j];
        for (std::size_t j = 0; j < dz.size(); ++j) v += c[j * d + i] * dz[j];
        next[i] = v;
    }
}

void guard(std::span<const double> x, double threshold, std::size_t step, double t) {
    for (double v : x) {
        if (!std::isfinite(v) || std::abs(v) > threshold) {
            std::ostringstream os;
            os << "solution exceeded the explosion threshold " << threshold << " at step " << step << " (t=" << t
               << ", value " << v << ")";
            throw ExplosionError(os.str(), step, t);
        }
    }
}

struct Layout {
    std::size_t delay_steps;
    double dt;
    GridPath path;
};

Layout prepare(const InitialCondition& eta, std::size_t d, const SolverConfig& cfg) {
    cfg.validate();
    const std::size_t r = cfg.delay_steps();
    const double dt = cfg.dt();
    if (eta.eta.dim() != d)
        throw DomainError("initial condition has dimension " + std::to_string(eta.eta.dim()) + ", expected " +
                          std::to_string(d));
    const GridPath init = initial_on_grid(eta, r, dt);
    GridPath path = GridPath::zeros(-static_cast<double>(r) * dt, dt, r + cfg.n_steps + 1, d);
    for (std::size_t k = 0; k <= r; ++k)
        for (std::size_t j = 0; j < d; ++j) path(k, j) = init(k, j);
    return {r, dt, std::move(path)};
}

void increments(const GridPath& p, std::size_t k, std::span<double> out) {
    for (std::size_t j = 0; j < p.dim(); ++j) out[j] = p(k + 1, j) - p(k, j);
}

}  // namespace

GridPath euler_mixed_sdde(const CoefficientSpec& spec, const InitialCondition& eta, const GridPath& wiener,
                          const GridPath& driver, const SolverConfig& cfg) {
    spec.validate();
    if (spec.required_history() > cfg.delay + 1e-12)
        throw ConstraintError("delay r is shorter than the coefficient look-back");
    if (wiener.dim() != spec.wiener_dim) throw DomainError("wiener path dimension does not match the spec");
    if (driver.dim() != spec.driver_dim) throw DomainError("driver path dimension does not match the spec");
    const std::size_t d = spec.state_dim;
    Layout lay = prepare(eta, d, cfg);
    const GridPath w = restrict_to_grid(wiener, cfg.n_steps, cfg.horizon, "wiener path");
    const GridPath z = restrict_to_grid(driver, cfg.n_steps, cfg.horizon, "driver path");

    CoefficientEvaluator ev(spec, lay.dt);
    const bool use_driver = !spec.driver_is_zero();
    std::vector<double> a(d), b(d * spec.wiener_dim), c(d * spec.driver_dim);
    std::vector<double> dw(spec.wiener_dim), dz(use_driver ? spec.driver_dim : 0);
    GridPath& x = lay.path;
    for (std::size_t k = 0; k < cfg.n_steps; ++k) {
        const double t = w.time(k);
        const Segment psi(x, lay.delay_steps + k, lay.delay_steps);
        ev.load(psi);
        ev.drift(t, a);
        ev.diffusion(t, b);
        if (use_driver) ev.driver(t, c);
        increments(w, k, dw);
        if (use_driver) increments(z, k, dz);
        auto next = x.point(lay.delay_steps + k + 1);
        advance(psi.now(), a, b, dw, c, dz, lay.dt, next);
        guard(next, cfg.explosion_threshold, k + 1, w.time(k + 1));
    }
    return std::move(lay.path);
}

double AdaptedDriver::at(std::size_t k, std::size_t j) const {
    if (k > current_)
        throw AdaptednessError("coefficient read the driver at step " + std::to_string(k) + " while at step " +
                               std::to_string(current_));
    return (*path_)(k, j);
}

double AdaptedDriver::at_time(double t, std::size_t j) const {
    if (t > current_time() + 1e-9 * path_->dt())
        throw AdaptednessError("coefficient read the driver at t=" + std::to_string(t) + " ahead of t=" +
                               std::to_string(current_time()));
    return path_->interpolate(std::min(t, current_time()), j);
}

GridPath euler_ito_sdde(const ItoSystem& system, const InitialCondition& eta, const GridPath& wiener,
                        const GridPath& context, const SolverConfig& cfg) {
    if (!system.drift || !system.diffusion) throw DomainError("ito system needs drift and diffusion");
    if (wiener.dim() != system.wiener_dim) throw DomainError("wiener path dimension does not match the system");
    const std::size_t d = system.state_dim;
    Layout lay = prepare(eta, d, cfg);
    const GridPath w = restrict_to_grid(wiener, cfg.n_steps, cfg.horizon, "wiener path");
    const GridPath env = restrict_to_grid(context, cfg.n_steps, cfg.horizon, "driver path");

    std::vector<double> f(d), g(d * system.wiener_dim), dw(system.wiener_dim);
    GridPath& x = lay.path;
    for (std::size_t k = 0; k < cfg.n_steps; ++k) {
        const double t = w.time(k);
        const Segment psi(x, lay.delay_steps + k, lay.delay_steps);
        const AdaptedDriver view(env, k);
        system.drift(t, psi, view, f);
        system.diffusion(t, psi, view, g);
        increments(w, k, dw);
        auto next = x.point(lay.delay_steps + k + 1);
        advance(psi.now(), f, g, dw, {}, {}, lay.dt, next);
        guard(next, cfg.explosion_threshold, k + 1, w.time(k + 1));
    }
    return std::move(lay.path);
}

namespace {

struct SharedEvaluator {
    CoefficientSpec spec;
    std::unique_ptr<CoefficientEvaluator> eval;

    SharedEvaluator(const CoefficientSpec& s, double dt) : spec(s) {
        eval = std::make_unique<CoefficientEvaluator>(spec, dt);
    }
};

}  // namespace

ItoSystem ito_system(const CoefficientSpec& spec, double dt) {
    auto shared = std::make_shared<SharedEvaluator>(spec, dt);
    ItoSystem sys;
    sys.state_dim = spec.state_dim;
    sys.wiener_dim = spec.wiener_dim;
    sys.drift = [shared](double t, const Segment& psi, const AdaptedDriver&, std::span<double> out) {
        shared->eval->load(psi);
        shared->eval->drift(t, out);
    };
    sys.diffusion = [shared](double t, const Segment& psi, const AdaptedDriver&, std::span<double> out) {
        shared->eval->load(psi);
        shared->eval->diffusion(t, out);
    };
    return sys;
}

ItoSystem mollified_ito_system(const CoefficientSpec& spec, double dt, std::size_t level) {
    if (level == 0) throw ConstraintError("mollifier level N must be at least 1");
    if (dt > 1.0 / (4.0 * static_cast<double>(level)) * (1.0 + 1e-12))
        throw ConstraintError("solver grid step " + std::to_string(dt) + " is too coarse for mollifier level " +
                              std::to_string(level) + " (needs dt <= 1/(4N))");
    ItoSystem sys = ito_system(spec, dt);
    if (spec.driver_is_zero()) return sys;

    auto shared = std::make_shared<SharedEvaluator>(spec, dt);
    const std::size_t d = spec.state_dim;
    const std::size_t l = spec.driver_dim;
    const double n = static_cast<double>(level);
    const double window_steps = 1.0 / (n * dt);
    sys.drift = [shared, d, l, n, window_steps](double t, const Segment& psi, const AdaptedDriver& z,
                                               std::span<double> out) {
        shared->eval->load(psi);
        shared->eval->drift(t, out);
        std::vector<double> c(d * l), now(l), start(l);
        shared->eval->driver(t, c);
        // dZ^N/dt = N (h_N(Z(t)) - h_N(Z((t - 1/N) v 0))), reading only the past.
        const std::size_t k = z.current_index();
        const auto [j, frac] = window_start(k, window_steps);
        std::vector<double> lo(l), hi(l);
        for (std::size_t c2 = 0; c2 < l; ++c2) {
            now[c2] = z.at(k, c2);
            lo[c2] = z.at(j, c2);
            if (frac > 0.0) hi[c2] = z.at(j + 1, c2);
        }
        clamp_to_ball(now, n);
        clamp_to_ball(lo, n);
        if (frac > 0.0) clamp_to_ball(hi, n);
        for (std::size_t c2 = 0; c2 < l; ++c2) {
            const double s = frac > 0.0 ? lo[c2] + frac * (hi[c2] - lo[c2]) : lo[c2];
            const double rate = n * (now[c2] - s);
            for (std::size_t i = 0; i < d; ++i) out[i] += c[c2 * d + i] * rate;
        }
    };
    return sys;
}

GridPath geometric_closed_form(double a, double b, double c, double x0, const GridPath& wiener,
                               const GridPath& driver) {
    if (wiener.dim() != 1 || driver.dim() != 1) throw DomainError("geometric closed form is scalar");
    const std::size_t n = wiener.size() - 1;
    const GridPath z = n == 0 ? driver.slice(0, 1) : restrict_to_grid(driver, n, wiener.end_time(), "driver path");
    GridPath out = GridPath::zeros(wiener.t0(), wiener.dt(), wiener.size(), 1);
    const double drift = a - 0.5 * b * b;
    for (std::size_t k = 0; k < wiener.size(); ++k)
        out(k) = x0 * std::exp(drift * wiener.time(k) + b * wiener(k) + c * z(k));
    return out;
}

}  // namespace mixsdde::solver
