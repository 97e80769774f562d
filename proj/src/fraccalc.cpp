#include "mixsdde/fraccalc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss.hpp>

#include "mixsdde/errors.hpp"
#include "mixsdde/fbm.hpp"

namespace mixsdde::frac {
namespace {

void check_alpha(double alpha, const char* op) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError(std::string(op) + ": alpha must lie in (0, 1)");
}

void check_finite(const GridPath& p, const char* op) {
    for (double v : p.data())
        if (!std::isfinite(v)) throw DomainError(std::string(op) + ": non-finite input value");
}

void check_scalar(const GridPath& p, const char* op) {
    if (p.dim() != 1) throw DomainError(std::string(op) + ": expects a scalar path");
    if (p.size() < 2) throw DomainError(std::string(op) + ": path needs at least two nodes");
    check_finite(p, op);
}

void check_same_grid(const GridPath& f, const GridPath& g, const char* op) {
    if (f.size() != g.size() || std::abs(f.t0() - g.t0()) > 1e-12 * f.dt() ||
        std::abs(f.dt() - g.dt()) > 1e-12 * f.dt())
        throw DomainError(std::string(op) + ": f and g must share the same grid");
}

// int_lo^hi s^{-1-beta} ds for 0 < lo < hi, without cancellation for hi ~ lo.
double moment0(double lo, double hi, double beta) {
    return std::pow(hi, -beta) * std::expm1(beta * std::log1p((hi - lo) / lo)) / beta;
}

// int_lo^hi s^{-beta} ds for 0 <= lo < hi.
double moment1(double lo, double hi, double beta) {
    if (lo == 0.0) return std::pow(hi, 1.0 - beta) / (1.0 - beta);
    return std::pow(lo, 1.0 - beta) * std::expm1((1.0 - beta) * std::log1p((hi - lo) / lo)) / (1.0 - beta);
}

// Kernel moments over the breakpoints s_0 = 0, s_i = first + (i-1) h.
struct TailMoments {
    std::vector<double> s;
    std::vector<double> i0;  // int over [s_{i-1}, s_i] of s^{-1-beta}; unused for i = 1
    std::vector<double> i1;  // int over [s_{i-1}, s_i] of s^{-beta}
};

TailMoments make_tail_moments(double beta, double first, double h, std::size_t count) {
    TailMoments m;
    m.s.resize(count + 1);
    m.i0.assign(count + 1, 0.0);
    m.i1.assign(count + 1, 0.0);
    m.s[0] = 0.0;
    for (std::size_t i = 1; i <= count; ++i) m.s[i] = first + static_cast<double>(i - 1) * h;
    if (count >= 1) m.i1[1] = moment1(0.0, m.s[1], beta);
    for (std::size_t i = 2; i <= count; ++i) {
        m.i0[i] = moment0(m.s[i - 1], m.s[i], beta);
        m.i1[i] = moment1(m.s[i - 1], m.s[i], beta);
    }
    return m;
}

// int_0^{s_K} (v0 - v(s)) s^{-1-beta} ds where v interpolates (s_i, value(i))
// linearly with value(0) = v0. On segment i, v0 - v(s) = A + B s exactly.
template <class Values>
double tail_integral(double v0, Values value, std::size_t count, const TailMoments& m) {
    double acc = 0.0;
    double prev = v0;
    for (std::size_t i = 1; i <= count; ++i) {
        const double vi = value(i);
        const double slope = (vi - prev) / (m.s[i] - m.s[i - 1]);
        if (i == 1) {
            acc -= slope * m.i1[1];
        } else {
            const double a = v0 - prev + slope * m.s[i - 1];
            acc += a * m.i0[i] - slope * m.i1[i];
        }
        prev = vi;
    }
    return acc;
}

// Same with |v0 - v(s)|; a sign change inside a segment is split at its root.
template <class Values>
double abs_tail_integral(double v0, Values value, std::size_t count, const TailMoments& m, double beta) {
    double acc = 0.0;
    double prev = v0;
    for (std::size_t i = 1; i <= count; ++i) {
        const double vi = value(i);
        const double lo = m.s[i - 1];
        const double hi = m.s[i];
        const double slope = (vi - prev) / (hi - lo);
        if (i == 1) {
            acc += std::abs(slope) * m.i1[1];
        } else {
            const double a = v0 - prev + slope * lo;
            const double e0 = v0 - prev;
            const double e1 = v0 - vi;
            if (e0 * e1 >= 0.0) {
                acc += std::abs(a * m.i0[i] - slope * m.i1[i]);
            } else {
                const double root = lo + (hi - lo) * e0 / (e0 - e1);
                if (root > lo && root < hi) {
                    acc += std::abs(a * moment0(lo, root, beta) - slope * moment1(lo, root, beta));
                    acc += std::abs(a * moment0(root, hi, beta) - slope * moment1(root, hi, beta));
                } else {
                    acc += std::abs(a * m.i0[i] - slope * m.i1[i]);
                }
            }
        }
        prev = vi;
    }
    return acc;
}

struct Grid {
    std::span<const double> v;  // n + 1 node values
    double a;
    double h;
    std::size_t n;  // number of cells
};

Grid as_grid(const GridPath& p) { return {p.data(), p.t0(), p.dt(), p.size() - 1}; }

// Position a + (k + theta) h with theta in [0, 1). `rest` = 1 - theta is kept
// separately so that points graded towards the right end of a cell keep their
// distance to the next node exactly.
struct Locus {
    std::size_t k;
    double theta;
    double rest;
};

Locus node_locus(std::size_t k) { return {k, 0.0, 1.0}; }

Locus locate(const Grid& g, double x) {
    const double p = (x - g.a) / g.h;
    const double r = std::round(p);
    if (std::abs(p - r) < 1e-12 * std::max(1.0, std::abs(p))) return node_locus(static_cast<std::size_t>(r));
    const double fl = std::floor(p);
    return {static_cast<std::size_t>(fl), p - fl, 1.0 - (p - fl)};
}

double interp(const Grid& g, Locus l) {
    if (l.theta == 0.0) return g.v[l.k];
    return (1.0 - l.theta) * g.v[l.k] + l.theta * g.v[l.k + 1];
}

// D^alpha_{a+} f at the locus, given moments for its breakpoint offset.
double forward_at(const Grid& f, double alpha, Locus l, const TailMoments& m, double inv_gamma) {
    const double v0 = interp(f, l);
    const double dist = (static_cast<double>(l.k) + l.theta) * f.h;
    std::size_t count;
    double tail;
    if (l.theta == 0.0) {
        count = l.k;
        tail = tail_integral(v0, [&](std::size_t i) { return f.v[l.k - i]; }, count, m);
    } else {
        count = l.k + 1;
        tail = tail_integral(v0, [&](std::size_t i) { return f.v[l.k + 1 - i]; }, count, m);
    }
    return inv_gamma * (v0 * std::pow(dist, -alpha) + alpha * tail);
}

double backward_at(const Grid& g, double alpha, Locus l, const TailMoments& m, double inv_gamma) {
    const double v0 = interp(g, l);
    const double dist = l.theta == 0.0 ? static_cast<double>(g.n - l.k) * g.h
                                       : (static_cast<double>(g.n - l.k - 1) + l.rest) * g.h;
    const std::size_t count = g.n - l.k;
    const double tail = tail_integral(v0, [&](std::size_t i) { return g.v[l.k + i]; }, count, m);
    return inv_gamma * ((v0 - g.v[g.n]) * std::pow(dist, alpha - 1.0) + (1.0 - alpha) * tail);
}

double forward_point(const Grid& f, double alpha, Locus l) {
    const double first = l.theta == 0.0 ? f.h : l.theta * f.h;
    const std::size_t count = l.theta == 0.0 ? l.k : l.k + 1;
    const auto m = make_tail_moments(alpha, first, f.h, count);
    return forward_at(f, alpha, l, m, 1.0 / std::tgamma(1.0 - alpha));
}

double backward_point(const Grid& g, double alpha, Locus l) {
    const double first = l.theta == 0.0 ? g.h : l.rest * g.h;
    const auto m = make_tail_moments(1.0 - alpha, first, g.h, g.n - l.k);
    return backward_at(g, alpha, l, m, 1.0 / std::tgamma(alpha));
}

// Forward derivative at a + (k + theta) h for k = 0..n-1 (theta in (0,1)).
std::vector<double> forward_shifted(const Grid& f, double alpha, double theta) {
    const auto m = make_tail_moments(alpha, theta * f.h, f.h, f.n);
    const double inv_gamma = 1.0 / std::tgamma(1.0 - alpha);
    std::vector<double> out(f.n);
    for (std::size_t k = 0; k < f.n; ++k) out[k] = forward_at(f, alpha, {k, theta, 1.0 - theta}, m, inv_gamma);
    return out;
}

std::vector<double> backward_shifted(const Grid& g, double alpha, double theta) {
    const auto m = make_tail_moments(1.0 - alpha, (1.0 - theta) * g.h, g.h, g.n);
    const double inv_gamma = 1.0 / std::tgamma(alpha);
    std::vector<double> out(g.n);
    for (std::size_t k = 0; k < g.n; ++k) out[k] = backward_at(g, alpha, {k, theta, 1.0 - theta}, m, inv_gamma);
    return out;
}

constexpr int kEndCellNodes = 20;

// int over the first `frac` of cell k of F, graded towards the cell's left node
// as theta = frac u^p.
template <class F>
double graded_left(F integrand, std::size_t k, double frac, double h, double p) {
    return boost::math::quadrature::gauss<double, kEndCellNodes>::integrate(
        [&](double u) {
            if (u <= 0.0) return 0.0;
            const double theta = frac * std::pow(u, p);
            return integrand(Locus{k, theta, 1.0 - theta}) * p * frac * h * std::pow(u, p - 1.0);
        },
        0.0, 1.0);
}

// int over the last `frac` of cell k of F, graded towards the cell's right node.
template <class F>
double graded_right(F integrand, std::size_t k, double frac, double h, double p) {
    return boost::math::quadrature::gauss<double, kEndCellNodes>::integrate(
        [&](double v) {
            if (v <= 0.0) return 0.0;
            const double rest = frac * std::pow(v, p);
            return integrand(Locus{k, 1.0 - rest, rest}) * p * frac * h * std::pow(v, p - 1.0);
        },
        0.0, 1.0);
}

}  // namespace

GridPath restrict_to_interval(const GridPath& path, std::optional<Interval> interval) {
    if (!interval) return path;
    if (!(interval->a < interval->b)) throw DomainError("interval must satisfy a < b");
    const std::size_t i0 = path.index_of(interval->a);
    const std::size_t i1 = path.index_of(interval->b);
    return path.slice(i0, i1 - i0 + 1);
}

double forward_rl_derivative_at(const GridPath& f, double alpha, double x) {
    check_alpha(alpha, "forward_rl_derivative");
    check_scalar(f, "forward_rl_derivative");
    const Grid g = as_grid(f);
    if (!(x > g.a)) throw DomainError("forward_rl_derivative: evaluation at x = a is singular");
    if (x > f.end_time() + 1e-12 * g.h) throw DomainError("forward_rl_derivative: x outside (a, b]");
    return forward_point(g, alpha, locate(g, std::min(x, f.end_time())));
}

double backward_rl_derivative_at(const GridPath& g, double alpha, double x) {
    check_alpha(alpha, "backward_rl_derivative");
    check_scalar(g, "backward_rl_derivative");
    const Grid gr = as_grid(g);
    if (!(x < g.end_time())) throw DomainError("backward_rl_derivative: evaluation at x = b is singular");
    if (x < gr.a - 1e-12 * gr.h) throw DomainError("backward_rl_derivative: x outside [a, b)");
    return backward_point(gr, alpha, locate(gr, std::max(x, gr.a)));
}

GridPath forward_rl_derivative(const GridPath& f_in, double alpha, std::optional<Interval> interval) {
    check_alpha(alpha, "forward_rl_derivative");
    const GridPath f = restrict_to_interval(f_in, interval);
    check_scalar(f, "forward_rl_derivative");
    const Grid g = as_grid(f);
    const auto m = make_tail_moments(alpha, g.h, g.h, g.n);
    const double inv_gamma = 1.0 / std::tgamma(1.0 - alpha);
    std::vector<double> out(g.n);
    for (std::size_t k = 1; k <= g.n; ++k) out[k - 1] = forward_at(g, alpha, node_locus(k), m, inv_gamma);
    return GridPath(g.a + g.h, g.h, 1, std::move(out));
}

GridPath backward_rl_derivative(const GridPath& g_in, double alpha, std::optional<Interval> interval) {
    check_alpha(alpha, "backward_rl_derivative");
    const GridPath g = restrict_to_interval(g_in, interval);
    check_scalar(g, "backward_rl_derivative");
    const Grid gr = as_grid(g);
    const auto m = make_tail_moments(1.0 - alpha, gr.h, gr.h, gr.n);
    const double inv_gamma = 1.0 / std::tgamma(alpha);
    std::vector<double> out(gr.n);
    for (std::size_t k = 0; k < gr.n; ++k) out[k] = backward_at(gr, alpha, node_locus(k), m, inv_gamma);
    return GridPath(gr.a, gr.h, 1, std::move(out));
}

double gls_integral(const GridPath& f_in, const GridPath& g_in, double alpha, std::optional<Interval> interval) {
    check_alpha(alpha, "gls_integral");
    const GridPath f = restrict_to_interval(f_in, interval);
    const GridPath g = restrict_to_interval(g_in, interval);
    check_scalar(f, "gls_integral");
    check_scalar(g, "gls_integral");
    check_same_grid(f, g, "gls_integral");
    const Grid fg = as_grid(f);
    const Grid gg = as_grid(g);
    const std::size_t n = fg.n;

    // The phase-free backward derivative carries the sign (-1)^{1-alpha} and
    // the integral the phase (-1)^alpha; their product is -1.
    auto integrand = [&](Locus l) { return forward_point(fg, alpha, l) * backward_point(gg, alpha, l); };

    const double p_left = 1.0 / (1.0 - alpha);
    const double p_right = 1.0 / alpha;
    double total = 0.0;
    if (n == 1) {
        total += graded_left(integrand, 0, 0.5, fg.h, p_left);
        total += graded_right(integrand, 0, 0.5, fg.h, p_right);
        return -total;
    }
    total += graded_left(integrand, 0, 1.0, fg.h, p_left);
    total += graded_right(integrand, n - 1, 1.0, fg.h, p_right);

    // Interior cells: two-point Gauss-Legendre per cell on shared kernel tables.
    if (n > 2) {
        const double x = 0.5 / std::sqrt(3.0);
        for (double theta : {0.5 - x, 0.5 + x}) {
            const auto fd = forward_shifted(fg, alpha, theta);
            const auto gd = backward_shifted(gg, alpha, theta);
            double s = 0.0;
            for (std::size_t k = 1; k + 1 < n; ++k) s += fd[k] * gd[k];
            total += 0.5 * fg.h * s;
        }
    }
    return -total;
}

GlsDiagnostics gls_integral_checked(const GridPath& f_in, const GridPath& g_in, double alpha,
                                    std::optional<Interval> interval) {
    const GridPath f = restrict_to_interval(f_in, interval);
    const GridPath g = restrict_to_interval(g_in, interval);
    GlsDiagnostics d;
    d.integral = gls_integral(f, g, alpha);
    d.norm_f = norm_1_alpha(f, alpha);
    d.seminorm_g = seminorm_0_alpha(g, alpha);
    // the coarse grid must keep both end points
    if ((f.size() - 1) % 2 == 0 && f.size() >= 5) {
        auto growth = [](double fine, double coarse) {
            if (fine == 0.0 && coarse == 0.0) return 0.0;
            return std::log2(fine / coarse);
        };
        d.growth_f = growth(d.norm_f, norm_1_alpha(f.restrict_to(2), alpha));
        d.growth_g = growth(d.seminorm_g, seminorm_0_alpha(g.restrict_to(2), alpha));
    }
    d.norms_unbounded = !std::isfinite(d.norm_f) || !std::isfinite(d.seminorm_g) || d.growth_f > 0.25 ||
                        d.growth_g > 0.25;
    return d;
}

double riemann_stieltjes_integral(const GridPath& f_in, const GridPath& g_in, RsRule rule,
                                  std::optional<Interval> interval) {
    const GridPath f = restrict_to_interval(f_in, interval);
    const GridPath g = restrict_to_interval(g_in, interval);
    check_scalar(f, "riemann_stieltjes_integral");
    check_scalar(g, "riemann_stieltjes_integral");
    check_same_grid(f, g, "riemann_stieltjes_integral");
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < f.size(); ++k) {
        const double fk = rule == RsRule::kLeft ? f(k) : 0.5 * (f(k) + f(k + 1));
        s += fk * (g(k + 1) - g(k));
    }
    return s;
}

double young_love_constant(double lambda, double mu) {
    if (!(lambda > 0.0 && lambda <= 1.0 && mu > 0.0 && mu <= 1.0))
        throw DomainError("young_love: exponents must lie in (0, 1]");
    if (!(lambda + mu > 1.0)) throw DomainError("young_love: requires lambda + mu > 1");
    return 1.0 / (1.0 - std::pow(2.0, 1.0 - lambda - mu));
}

double young_love_bound(const GridPath& f_in, const GridPath& g_in, double lambda, double mu,
                        std::optional<Interval> interval) {
    const double c = young_love_constant(lambda, mu);
    const GridPath f = restrict_to_interval(f_in, interval);
    const GridPath g = restrict_to_interval(g_in, interval);
    check_scalar(f, "young_love_bound");
    check_scalar(g, "young_love_bound");
    check_same_grid(f, g, "young_love_bound");
    const double len = f.end_time() - f.t0();
    const double f_sup = f.sup_norm();
    const double f_hol = fbm::holder_seminorm(f, lambda);
    const double g_hol = fbm::holder_seminorm(g, mu);
    return c * g_hol * (f_sup + f_hol * std::pow(len, lambda)) * std::pow(len, mu);
}

double norm_1_alpha(const GridPath& f_in, double alpha, std::optional<Interval> interval) {
    check_alpha(alpha, "norm_1_alpha");
    const GridPath f = restrict_to_interval(f_in, interval);
    check_finite(f, "norm_1_alpha");
    if (f.size() < 2) throw DomainError("norm_1_alpha: path needs at least two nodes");
    const std::size_t n = f.size() - 1;
    const double h = f.dt();
    const double len = static_cast<double>(n) * h;
    const auto m = make_tail_moments(alpha, h, h, n);

    // Scalar paths integrate |f(t) - f(s)| exactly on each cell; vector paths
    // use the interpolated Euclidean distance to f(t).
    std::vector<double> inner(n + 1, 0.0);
    for (std::size_t k = 1; k <= n; ++k) {
        if (f.dim() == 1) {
            inner[k] = abs_tail_integral(f(k), [&](std::size_t i) { return f(k - i); }, k, m, alpha);
        } else {
            auto dist = [&](std::size_t i) {
                double s = 0.0;
                for (std::size_t j = 0; j < f.dim(); ++j) s += (f(k, j) - f(k - i, j)) * (f(k, j) - f(k - i, j));
                return -std::sqrt(s);
            };
            inner[k] = tail_integral(0.0, dist, k, m);
        }
    }
    double outer = 0.0;
    for (std::size_t k = 0; k < n; ++k) outer += 0.5 * h * (inner[k] + inner[k + 1]);
    const double f_a = euclidean_norm(f.point(0));
    return f_a * std::pow(len, 1.0 - alpha) / (1.0 - alpha) + outer;
}

double seminorm_0_alpha(const GridPath& g_in, double alpha, std::optional<Interval> interval) {
    check_alpha(alpha, "seminorm_0_alpha");
    const GridPath g = restrict_to_interval(g_in, interval);
    check_finite(g, "seminorm_0_alpha");
    if (g.size() < 2) throw DomainError("seminorm_0_alpha: path needs at least two nodes");
    const std::size_t n = g.size() - 1;
    const double h = g.dt();
    const double beta = 1.0 - alpha;
    const auto m = make_tail_moments(beta, h, h, n);
    std::vector<double> inv_pow(n + 1, 0.0);
    for (std::size_t j = 1; j <= n; ++j) inv_pow[j] = std::pow(static_cast<double>(j) * h, -beta);

    const std::size_t d = g.dim();
    auto dist = [&](std::size_t i, std::size_t k) {
        if (d == 1) return std::abs(g(k) - g(i));
        double s = 0.0;
        for (std::size_t c = 0; c < d; ++c) s += (g(k, c) - g(i, c)) * (g(k, c) - g(i, c));
        return std::sqrt(s);
    };

    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        // Cumulative int_s^t |g(u) - g(s)| (u - s)^{-2+alpha} du as t moves right.
        double acc = 0.0;
        double prev = 0.0;  // |g(u) - g(s)| at the previous breakpoint
        double prev_signed = 0.0;
        for (std::size_t j = 1; i + j <= n; ++j) {
            const std::size_t k = i + j;
            const double cur = dist(i, k);
            if (d == 1) {
                const double signed_cur = g(i) - g(k);
                const double slope = -(signed_cur - prev_signed) / h;  // v(s) slope with v0 - v = signed
                if (j == 1) {
                    acc += std::abs(slope) * m.i1[1];
                } else {
                    const double lo = m.s[j - 1];
                    const double hi = m.s[j];
                    const double a = prev_signed + slope * lo;
                    if (prev_signed * signed_cur >= 0.0) {
                        acc += std::abs(a * m.i0[j] - slope * m.i1[j]);
                    } else {
                        const double root = lo + h * prev_signed / (prev_signed - signed_cur);
                        acc += std::abs(a * moment0(lo, root, beta) - slope * moment1(lo, root, beta));
                        acc += std::abs(a * moment0(root, hi, beta) - slope * moment1(root, hi, beta));
                    }
                }
                prev_signed = signed_cur;
            } else {
                const double slope = (cur - prev) / h;
                if (j == 1) {
                    acc += slope * m.i1[1];
                } else {
                    const double a = prev - slope * m.s[j - 1];
                    acc += a * m.i0[j] + slope * m.i1[j];
                }
            }
            prev = cur;
            best = std::max(best, cur * inv_pow[j] + acc);
        }
    }
    return best;
}

NormBundle fractional_norms(const GridPath& f_in, double alpha, double lambda, std::optional<Interval> interval) {
    const GridPath f = restrict_to_interval(f_in, interval);
    NormBundle nb;
    nb.norm_1_alpha = norm_1_alpha(f, alpha);
    nb.seminorm_0_alpha = seminorm_0_alpha(f, alpha);
    nb.sup_norm = f.sup_norm();
    nb.holder = fbm::holder_seminorm(f, lambda);
    return nb;
}

DelayNormBundle delay_norms(const GridPath& f, double alpha, double t) {
    check_alpha(alpha, "delay_norms");
    check_finite(f, "delay_norms");
    if (!(t > 0.0)) throw DomainError("delay_norms: t must be positive");
    if (f.t0() > 1e-12 * f.dt()) throw DomainError("delay_norms: path must start at -r <= 0");
    const std::size_t zero = f.index_of(0.0);
    const std::size_t kt = f.index_of(t);
    const std::size_t lags = kt - zero;
    const double h = f.dt();
    const std::size_t d = f.dim();

    DelayNormBundle out;
    for (std::size_t k = 0; k <= kt; ++k) out.norm_inf_t = std::max(out.norm_inf_t, euclidean_norm(f.point(k)));

    // phi(j h) = sup over nodes v <= t - j h of |f(v + j h) - f(v)|, phi(0) = 0.
    std::vector<double> phi(lags + 1, 0.0);
    for (std::size_t j = 1; j <= lags; ++j) {
        double mx = 0.0;
        for (std::size_t i = 0; i + j <= kt; ++i) {
            double diff;
            if (d == 1) {
                diff = std::abs(f(i + j) - f(i));
            } else {
                double s = 0.0;
                for (std::size_t c = 0; c < d; ++c) s += (f(i + j, c) - f(i, c)) * (f(i + j, c) - f(i, c));
                diff = std::sqrt(s);
            }
            mx = std::max(mx, diff);
        }
        phi[j] = mx;
    }
    const auto m = make_tail_moments(alpha, h, h, lags);
    out.norm_1_t = tail_integral(0.0, [&](std::size_t j) { return -phi[j]; }, lags, m);
    out.norm_t = out.norm_inf_t + out.norm_1_t;
    return out;
}

}  // namespace mixsdde::frac
