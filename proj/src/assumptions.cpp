#include "mixsdde/assumptions.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mixsdde/errors.hpp"
#include "mixsdde/fbm.hpp"

namespace mixsdde {

namespace {

constexpr double kSlack = 1e-9;

struct SampleGrid {
    double dt;
    std::size_t steps;
};

SampleGrid sample_grid(const CoefficientSpec& spec) {
    const double tap = spec.required_history();
    if (tap > 0.0) return {tap / 16.0, 32};
    return {1.0 / 16.0, 16};
}

// Random segment on [-steps*dt, 0]: constant, random walk, oscillation or a
// single spike, at a log-uniform scale.
GridPath random_segment(std::mt19937_64& rng, const SampleGrid& g, std::size_t d) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::uniform_int_distribution<int> shape(0, 3);
    const double scale = std::pow(10.0, 2.5 * unif(rng) + 0.5);
    GridPath p = GridPath::zeros(-static_cast<double>(g.steps) * g.dt, g.dt, g.steps + 1, d);
    for (std::size_t j = 0; j < d; ++j) {
        const int kind = shape(rng);
        const double level = scale * unif(rng);
        const double freq = 1.0 + 8.0 * (unif(rng) + 1.0);
        const auto spike = static_cast<std::size_t>((unif(rng) + 1.0) * 0.5 * static_cast<double>(g.steps));
        double walk = level;
        for (std::size_t k = 0; k <= g.steps; ++k) {
            double v = level;
            switch (kind) {
                case 1: walk += scale * 0.3 * unif(rng); v = walk; break;
                case 2: v = level * std::sin(freq * static_cast<double>(k) * g.dt + unif(rng)); break;
                case 3: v = k == spike ? level : 0.0; break;
                default: break;
            }
            p(k, j) = v;
        }
    }
    return p;
}

GridPath scaled(const GridPath& p, double factor) {
    GridPath out = p;
    for (double& v : out.data()) v *= factor;
    return out;
}

GridPath combine(const GridPath& a, const GridPath& b, double wb) {
    GridPath out = a;
    auto src = b.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += wb * src[i];
    return out;
}

Segment whole(const GridPath& p) { return Segment(p, p.size() - 1, p.size() - 1); }

// Unit-norm direction.
GridPath random_direction(std::mt19937_64& rng, const SampleGrid& g, std::size_t d) {
    GridPath e = random_segment(rng, g, d);
    const double n = e.sup_norm();
    return n > 0.0 ? scaled(e, 1.0 / n) : GridPath::constant(e.t0(), e.dt(), e.size(), std::vector<double>(d, 1.0));
}

double frobenius(std::span<const double> v) { return euclidean_norm(v); }

double frobenius_diff(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

struct Buffers {
    std::vector<double> a, b, c, dc;
    explicit Buffers(const CoefficientSpec& s)
        : a(s.state_dim), b(s.state_dim * s.wiener_dim), c(s.state_dim * s.driver_dim), dc(s.state_dim * s.driver_dim) {}
};

void eval_all(CoefficientEvaluator& ev, const Segment& psi, double t, Buffers& out) {
    ev.load(psi);
    ev.drift(t, out.a);
    ev.diffusion(t, out.b);
    ev.driver(t, out.c);
}

class Tracker {
public:
    Tracker(std::string name, double bound) { check_.name = std::move(name); check_.bound = bound; }

    void record(double lhs, double rhs, const std::string& context) {
        ++check_.samples;
        const double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? INFINITY : 0.0);
        if (ratio > check_.worst_ratio) {
            check_.worst_ratio = ratio;
            if (ratio > 1.0 + kSlack) {
                std::ostringstream os;
                os.precision(6);
                os << context << ": lhs=" << lhs << " > rhs=" << rhs;
                check_.witness = os.str();
                check_.passed = false;
            }
        }
    }
    AssumptionCheck result() && { return std::move(check_); }

private:
    AssumptionCheck check_;
};

std::string describe(double t, double norm) {
    std::ostringstream os;
    os.precision(6);
    os << "t=" << t << ", ||psi||_C=" << norm;
    return os.str();
}

}  // namespace

bool AssumptionReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const AssumptionCheck& c) { return !c.applicable || c.passed; });
}

const AssumptionCheck& AssumptionReport::check(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw DomainError("no assumption check named " + name);
}

AssumptionReport check_assumptions(const CoefficientSpec& spec, const HolderParams& params,
                                   const AssumptionCheckOptions& options) {
    spec.validate();
    if (options.sample_budget == 0) throw ConstraintError("assumption check needs a positive sample budget");
    if (!(options.horizon > 0.0)) throw ConstraintError("assumption check horizon must be positive");

    AssumptionReport report;
    report.beta_used = spec.claimed.beta.value_or(params.beta);
    report.theta_used = spec.claimed.theta.value_or(params.theta);
    report.implied = closed_form_constants(spec, report.beta_used, options.horizon);
    const auto& implied = report.implied;
    const bool claimed_k = spec.claimed.growth.has_value();
    report.growth_used = spec.claimed.growth.value_or(implied.constant_k);
    report.lipschitz_used = spec.claimed.lipschitz.value_or(implied.lipschitz);

    const SampleGrid grid = sample_grid(spec);
    const std::size_t d = spec.state_dim;
    const double horizon = options.horizon;
    auto rng = make_engine(options.seed, StreamPurpose::kAssumptionCheck);
    std::uniform_real_distribution<double> unif01(0.0, 1.0);

    CoefficientEvaluator ev(spec, grid.dt);
    Buffers s1(spec), s2(spec);

    auto norm_of = [](const GridPath& p) { return p.sup_norm(); };

    // H1: linear growth.
    {
        const double k = claimed_k ? report.growth_used : implied.growth;
        Tracker h1("H1", k);
        for (std::size_t i = 0; i < options.sample_budget; ++i) {
            const GridPath p = random_segment(rng, grid, d);
            const Segment psi = whole(p);
            const double t = horizon * unif01(rng);
            eval_all(ev, psi, t, s1);
            const double norm = norm_of(p);
            const double lhs = euclidean_norm(s1.a) + frobenius(s1.b) + frobenius(s1.c);
            h1.record(lhs, k * (1.0 + norm), describe(t, norm));
        }
        report.checks.push_back(std::move(h1).result());
    }

    // H2: bounded Fréchet derivative of c, plus a difference-quotient cross-check
    // of the closed-form derivative.
    {
        const double k = claimed_k ? report.growth_used : implied.derivative_bound;
        Tracker h2("H2", k);
        Tracker cross("H2-crosscheck", 1e-4);
        for (std::size_t i = 0; i < options.sample_budget; ++i) {
            const GridPath p = random_segment(rng, grid, d);
            const GridPath e = random_direction(rng, grid, d);
            const Segment psi = whole(p);
            const Segment dir = whole(e);
            const double t = horizon * unif01(rng);
            ev.load(psi);
            ev.driver_derivative(t, dir, s1.dc);
            const double norm = norm_of(p);
            const double deriv = frobenius(s1.dc);
            h2.record(deriv, k, describe(t, norm));

            const double h = 1e-5 * (1.0 + norm);
            const GridPath plus = combine(p, e, h);
            const GridPath minus = combine(p, e, -h);
            ev.load(whole(plus));
            ev.driver(t, s1.c);
            ev.load(whole(minus));
            ev.driver(t, s2.c);
            double err = 0.0;
            for (std::size_t j = 0; j < s1.c.size(); ++j)
                err = std::max(err, std::abs((s1.c[j] - s2.c[j]) / (2.0 * h) - s1.dc[j]));
            cross.record(err / (1.0 + deriv), 1e-4, describe(t, norm));
        }
        report.checks.push_back(std::move(h2).result());
        report.checks.push_back(std::move(cross).result());
    }

    // H3: Lipschitz continuity of a, b and the derivative of c on balls.
    {
        const double k = report.lipschitz_used;
        Tracker h3("H3", k);
        for (std::size_t i = 0; i < options.sample_budget; ++i) {
            const GridPath p1 = random_segment(rng, grid, d);
            const GridPath bump = random_segment(rng, grid, d);
            const double rel = std::pow(10.0, -3.0 * unif01(rng));
            const double bn = bump.sup_norm();
            const GridPath p2 = bn > 0.0 ? combine(p1, bump, rel * (1.0 + norm_of(p1)) / bn) : p1;
            const GridPath e = random_direction(rng, grid, d);
            const double t = horizon * unif01(rng);
            eval_all(ev, whole(p1), t, s1);
            ev.driver_derivative(t, whole(e), s1.dc);
            eval_all(ev, whole(p2), t, s2);
            ev.driver_derivative(t, whole(e), s2.dc);
            const double dist = norm_of(combine(p1, p2, -1.0));
            if (dist == 0.0) continue;
            const double lhs =
                frobenius_diff(s1.a, s2.a) + frobenius_diff(s1.b, s2.b) + frobenius_diff(s1.dc, s2.dc);
            std::ostringstream ctx;
            ctx.precision(6);
            ctx << describe(t, norm_of(p1)) << ", ||psi2||_C=" << norm_of(p2) << ", ||psi1-psi2||_C=" << dist;
            h3.record(lhs, k * dist, ctx.str());
        }
        report.checks.push_back(std::move(h3).result());
    }

    // H4: time regularity of c and of its derivative.
    {
        const double k = claimed_k ? report.growth_used : implied.time_holder;
        const double beta = report.beta_used;
        Tracker h4("H4", k);
        for (std::size_t i = 0; i < options.sample_budget; ++i) {
            const GridPath p = random_segment(rng, grid, d);
            const GridPath e = random_direction(rng, grid, d);
            const Segment psi = whole(p);
            const double t1 = horizon * unif01(rng);
            const double t2 = horizon * unif01(rng);
            if (t1 == t2) continue;
            const double gap = std::pow(std::abs(t1 - t2), beta);
            ev.load(psi);
            ev.driver(t1, s1.c);
            ev.driver(t2, s2.c);
            ev.driver_derivative(t1, whole(e), s1.dc);
            ev.driver_derivative(t2, whole(e), s2.dc);
            const double norm = norm_of(p);
            std::ostringstream ctx;
            ctx.precision(6);
            ctx << "t1=" << t1 << ", t2=" << t2 << ", ||psi||_C=" << norm;
            h4.record(frobenius_diff(s1.c, s2.c), k * gap * (1.0 + norm), ctx.str());
            h4.record(frobenius_diff(s1.dc, s2.dc), k * gap, ctx.str() + " (derivative)");
        }
        report.checks.push_back(std::move(h4).result());
    }

    // H5: Hoelder regularity of the initial condition on its grid.
    {
        AssumptionCheck h5;
        h5.name = "H5";
        if (!options.initial || options.initial->eta.size() < 2) {
            h5.applicable = false;
        } else {
            const double holder = fbm::holder_seminorm(options.initial->eta, report.theta_used);
            h5.bound = claimed_k ? report.growth_used : holder;
            h5.samples = 1;
            h5.worst_ratio = h5.bound > 0.0 ? holder / h5.bound : (holder > 0.0 ? INFINITY : 0.0);
            h5.passed = h5.worst_ratio <= 1.0 + kSlack;
            if (!h5.passed) {
                std::ostringstream os;
                os.precision(6);
                os << "grid Hoelder seminorm of eta at theta=" << report.theta_used << " is " << holder;
                h5.witness = os.str();
            }
        }
        report.checks.push_back(std::move(h5));
    }
    return report;
}

}  // namespace mixsdde
