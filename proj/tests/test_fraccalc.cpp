#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "mixsdde/errors.hpp"
#include "mixsdde/fraccalc.hpp"
#include "test_util.hpp"

using namespace mixsdde;
using namespace mixsdde::frac;
using testutil::sampled;

namespace {

const double kPi = std::numbers::pi;

// Independent oracle: the forward derivative of a smooth f by tanh-sinh
// quadrature of its defining integral.
double forward_oracle(const std::function<double(double)>& f, double alpha, double a, double x) {
    // with d = x - u = s^{1/(1-alpha)} the kernel cancels against the Jacobian
    boost::math::quadrature::tanh_sinh<double> q;
    auto slope = [&](double s) {
        const double d = std::max(std::pow(s, 1.0 / (1.0 - alpha)), 1e-10);
        return (f(x) - f(x - d)) / d / (1.0 - alpha);
    };
    const double tail = q.integrate(slope, 0.0, std::pow(x - a, 1.0 - alpha));
    return (f(x) / std::pow(x - a, alpha) + alpha * tail) / std::tgamma(1.0 - alpha);
}

double backward_oracle(const std::function<double(double)>& g, double alpha, double x, double b) {
    // d = u - x = s^{1/alpha}
    boost::math::quadrature::tanh_sinh<double> q;
    auto slope = [&](double s) {
        const double d = std::max(std::pow(s, 1.0 / alpha), 1e-10);
        return (g(x) - g(x + d)) / d / alpha;
    };
    const double tail = q.integrate(slope, 0.0, std::pow(b - x, alpha));
    return ((g(x) - g(b)) / std::pow(b - x, 1.0 - alpha) + (1.0 - alpha) * tail) / std::tgamma(alpha);
}

struct Trig {
    double c0;
    std::array<double, 3> amp, phase;
    double operator()(double t) const {
        double v = c0;
        for (int k = 0; k < 3; ++k) v += amp[k] * std::sin((k + 1) * kPi * t + phase[k]);
        return v;
    }
};

Trig random_trig(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0), ph(0.0, 2.0 * kPi);
    Trig t{u(rng), {}, {}};
    for (int k = 0; k < 3; ++k) {
        t.amp[k] = u(rng) / (k + 1);
        t.phase[k] = ph(rng);
    }
    return t;
}

}  // namespace

TEST_CASE("oracles agree with the closed forms they stand in for") {
    // power rule against the quadrature definition
    for (double beta : {0.5, 1.0, 2.0})
        for (double alpha : {0.25, 0.5}) {
            const double closed = std::tgamma(beta + 1) / std::tgamma(beta - alpha + 1) * std::pow(0.7, beta - alpha);
            CHECK(forward_oracle([&](double t) { return std::pow(t, beta); }, alpha, 0.0, 0.7) ==
                  doctest::Approx(closed).epsilon(1e-8));
        }
    // D^{1-alpha}_{b-} of b - x is (b - x)^alpha / Gamma(alpha + 1)
    CHECK(backward_oracle([](double x) { return 1.0 - x; }, 0.5, 0.75, 1.0) ==
          doctest::Approx(std::sqrt(0.25) / std::tgamma(1.5)).epsilon(1e-8));
}

TEST_CASE("forward derivative of constants and of the identity") {
    const GridPath one = sampled(0.0, 1.0, 1 << 14, [](double) { return 1.0; });
    CHECK(forward_rl_derivative_at(one, 0.5, 1.0) == doctest::Approx(1.0 / std::sqrt(kPi)).epsilon(1e-4));
    const GridPath zero = sampled(0.0, 1.0, 64, [](double) { return 0.0; });
    const GridPath dz = forward_rl_derivative(zero, 0.3);
    for (double v : dz.data()) CHECK(v == 0.0);
    const GridPath id = sampled(0.0, 1.0, 1 << 12, [](double t) { return t; });
    CHECK(forward_rl_derivative_at(id, 0.5, 1.0) == doctest::Approx(1.1283791670955126).epsilon(1e-6));
}

TEST_CASE("forward derivative power rule at grid 2^12") {
    for (double beta : {0.5, 1.0, 2.0})
        for (double alpha : {0.25, 0.5}) {
            const GridPath f = sampled(0.0, 1.0, 1 << 12, [&](double t) { return std::pow(t, beta); });
            const GridPath d = forward_rl_derivative(f, alpha);
            double worst = 0.0;
            for (std::size_t k = 0; k < d.size(); ++k) {
                const double x = d.time(k);
                if (x < 0.05) continue;
                const double exact = std::tgamma(beta + 1) / std::tgamma(beta - alpha + 1) * std::pow(x, beta - alpha);
                worst = std::max(worst, std::abs(d(k) / exact - 1.0));
            }
            CAPTURE(beta);
            CAPTURE(alpha);
            CHECK(worst < 1e-3);
        }
}

TEST_CASE("forward derivative of a smooth function matches the quadrature oracle") {
    auto f = [](double t) { return std::exp(-t) * std::cos(3.0 * t); };
    const GridPath p = sampled(0.0, 1.0, 1 << 12, f);
    for (double x : {0.1, 0.5, 0.9})
        CHECK(forward_rl_derivative_at(p, 0.35, x) == doctest::Approx(forward_oracle(f, 0.35, 0.0, x)).epsilon(1e-4));
}

TEST_CASE("forward derivative domain errors") {
    const GridPath id = sampled(0.0, 1.0, 16, [](double t) { return t; });
    CHECK_THROWS_AS(forward_rl_derivative_at(id, 0.5, 0.0), DomainError);
    CHECK_THROWS_AS(forward_rl_derivative_at(id, 0.0, 0.5), DomainError);
    CHECK_THROWS_AS(forward_rl_derivative_at(id, 1.0, 0.5), DomainError);
    GridPath bad = id;
    bad(3) = std::nan("");
    CHECK_THROWS_AS(forward_rl_derivative(bad, 0.5), DomainError);
    bad(3) = INFINITY;
    CHECK_THROWS_AS(gls_integral(bad, id, 0.5), DomainError);
}

TEST_CASE("backward derivative") {
    const GridPath c = sampled(0.0, 1.0, 64, [](double) { return -2.0; });
    const GridPath dc = backward_rl_derivative(c, 0.4);
    for (double v : dc.data()) CHECK(v == 0.0);

    // g(x) = b - x at x = b - h: (1/sqrt(pi)) h^{1/2} (1 + 1)
    const std::size_t n = 1 << 10;
    const GridPath g = sampled(0.0, 1.0, n, [](double x) { return 1.0 - x; });
    const double h = 1.0 / n;
    CHECK(backward_rl_derivative_at(g, 0.5, 1.0 - h) == doctest::Approx(2.0 * std::sqrt(h / kPi)).epsilon(1e-9));
    CHECK(backward_rl_derivative_at(g, 0.5, 0.25) == doctest::Approx(2.0 * std::sqrt(0.75 / kPi)).epsilon(1e-9));

    auto smooth = [](double x) { return std::sin(2.0 * x) + x * x; };
    const GridPath s = sampled(0.0, 1.0, 1 << 12, smooth);
    for (double x : {0.0, 0.3, 0.8})
        CHECK(backward_rl_derivative_at(s, 0.35, x) == doctest::Approx(backward_oracle(smooth, 0.35, x, 1.0)).epsilon(1e-4));

    CHECK_THROWS_AS(backward_rl_derivative_at(s, 0.35, 1.0), DomainError);
}

TEST_CASE("backward derivative is linear") {
    const GridPath g1 = sampled(0.0, 1.0, 256, [](double x) { return std::cos(3.0 * x); });
    const GridPath g2 = sampled(0.0, 1.0, 256, [](double x) { return x * x * x; });
    GridPath sum = g1;
    for (std::size_t k = 0; k < sum.size(); ++k) sum(k) += g2(k);
    const GridPath d1 = backward_rl_derivative(g1, 0.3);
    const GridPath d2 = backward_rl_derivative(g2, 0.3);
    const GridPath ds = backward_rl_derivative(sum, 0.3);
    for (std::size_t k = 0; k < ds.size(); ++k) CHECK(std::abs(ds(k) - d1(k) - d2(k)) < 1e-10);
}

TEST_CASE("gls_integral closed-form cases") {
    const GridPath one = sampled(0.0, 1.0, 512, [](double) { return 1.0; });
    const GridPath g = sampled(0.0, 1.0, 512, [](double t) { return std::exp(t) - 3.0 * t; });
    CHECK(gls_integral(one, g, 0.4) == doctest::Approx(g(512) - g(0)).epsilon(1e-5));

    const std::size_t n = 1 << 14;
    const GridPath t = sampled(0.0, 1.0, n, [](double x) { return x; });
    const GridPath t2 = sampled(0.0, 1.0, n, [](double x) { return x * x; });
    CHECK(std::abs(gls_integral(t, t2, 0.3) - 2.0 / 3.0) < 1e-3);
    const GridPath s = sampled(0.0, 1.0, n, [](double x) { return std::sin(x); });
    CHECK(std::abs(gls_integral(s, t, 0.25) - (1.0 - std::cos(1.0))) < 1e-3);

    const GridPath zero = sampled(0.0, 1.0, 64, [](double) { return 0.0; });
    CHECK(gls_integral(zero, sampled(0.0, 1.0, 64, [](double x) { return x; }), 0.5) == 0.0);
}

TEST_CASE("gls_integral converges to the Riemann-Stieltjes oracle under refinement") {
    double previous = INFINITY;
    for (int k = 8; k <= 14; k += 2) {
        const std::size_t n = std::size_t{1} << k;
        const GridPath f = sampled(0.0, 1.0, n, [](double x) { return x; });
        const GridPath g = sampled(0.0, 1.0, n, [](double x) { return x * x; });
        const double diff = std::abs(gls_integral(f, g, 0.3) - riemann_stieltjes_integral(f, g, RsRule::kMidpoint));
        CAPTURE(k);
        CHECK(diff < previous);
        previous = diff;
    }
    CHECK(previous < 1e-3);
}

TEST_CASE("gls_integral is additive over subintervals") {
    const std::size_t n = 1 << 12;
    const GridPath f = sampled(0.0, 1.0, n, [](double x) { return std::cos(2.0 * x); });
    const GridPath g = sampled(0.0, 1.0, n, [](double x) { return x * x + std::sin(x); });
    const double whole = gls_integral(f, g, 0.3);
    const double left = gls_integral(f, g, 0.3, Interval{0.0, 0.375});
    const double right = gls_integral(f, g, 0.3, Interval{0.375, 1.0});
    CHECK(std::abs(whole - left - right) < 1e-6);
}

TEST_CASE("gls_integral_checked flags norms that blow up") {
    const std::size_t n = 512;
    const GridPath f = sampled(0.0, 1.0, n, [](double x) { return std::cos(x); });
    const GridPath smooth = sampled(0.0, 1.0, n, [](double x) { return x * x; });
    const auto ok = gls_integral_checked(f, smooth, 0.35);
    CHECK_FALSE(ok.norms_unbounded);
    CHECK(ok.integral == doctest::Approx(gls_integral(f, smooth, 0.35)));
    // a jump is not Hoelder of any order: ||g||_{0,alpha} grows like h^{alpha - 1}
    const GridPath jump = sampled(0.0, 1.0, n, [](double x) { return x < 0.5 + 1e-3 ? 0.0 : 1.0; });
    const auto bad = gls_integral_checked(f, jump, 0.35);
    CHECK(bad.norms_unbounded);
    CHECK(bad.growth_g > 0.5);
}

TEST_CASE("Riemann-Stieltjes sums") {
    const GridPath g = sampled(0.0, 1.0, 10, [](double x) { return x * x * x; });
    const GridPath c = sampled(0.0, 1.0, 10, [](double) { return 2.5; });
    CHECK(riemann_stieltjes_integral(c, g, RsRule::kLeft) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(riemann_stieltjes_integral(c, g, RsRule::kMidpoint) == doctest::Approx(2.5).epsilon(1e-15));

    const GridPath t2 = sampled(0.0, 1.0, 2, [](double x) { return x; });
    CHECK(riemann_stieltjes_integral(t2, t2, RsRule::kLeft) == doctest::Approx(0.25).epsilon(1e-15));

    for (int k = 1; k <= 12; ++k) {
        const std::size_t n = std::size_t{1} << k;
        const GridPath t = sampled(0.0, 1.0, n, [](double x) { return x; });
        CHECK(std::abs(riemann_stieltjes_integral(t, t, RsRule::kLeft) - 0.5) <= 0.5 / n + 1e-15);
    }

    const GridPath other = sampled(0.0, 1.0, 20, [](double x) { return x; });
    CHECK_THROWS_AS(riemann_stieltjes_integral(g, other, RsRule::kLeft), DomainError);
}

TEST_CASE("Young-Love bound") {
    CHECK(young_love_constant(1.0, 1.0) == doctest::Approx(2.0));
    const GridPath zero = sampled(0.0, 1.0, 64, [](double) { return 0.0; });
    const GridPath t = sampled(0.0, 1.0, 64, [](double x) { return x; });
    CHECK(young_love_bound(zero, t, 0.7, 0.7) == 0.0);
    CHECK(gls_integral(zero, t, 0.4) == 0.0);
    const double b = young_love_bound(t, t, 1.0, 1.0);
    CHECK(b == doctest::Approx(2.0 * young_love_constant(1.0, 1.0)).epsilon(1e-12));
    CHECK(b >= 0.5);
    CHECK_THROWS_AS(young_love_bound(t, t, 0.5, 0.5), DomainError);
    CHECK_THROWS_AS(young_love_bound(t, t, 0.3, 0.6), DomainError);
}

TEST_CASE("random smooth pairs respect the fractional estimate and the Young-Love bound") {
    std::mt19937_64 rng(20240611);
    const std::size_t n = 256;
    const double alpha = 0.35;
    const double c13 = 1.0 / (std::tgamma(alpha) * std::tgamma(1.0 - alpha));
    for (int trial = 0; trial < 100; ++trial) {
        const Trig ft = random_trig(rng), gt = random_trig(rng);
        const GridPath f = sampled(0.0, 1.0, n, ft), g = sampled(0.0, 1.0, n, gt);
        const double integral = std::abs(gls_integral(f, g, alpha));
        CAPTURE(trial);
        CHECK(integral <= c13 * norm_1_alpha(f, alpha) * seminorm_0_alpha(g, alpha));
        CHECK(integral <= young_love_bound(f, g, 1.0, 1.0));
        CHECK(integral <= young_love_bound(f, g, 0.8, 0.7));
    }
}

TEST_CASE("fractional norms") {
    const GridPath zero = sampled(0.0, 1.0, 128, [](double) { return 0.0; });
    const NormBundle z = fractional_norms(zero, 0.4, 0.5);
    CHECK(z.norm_1_alpha == 0.0);
    CHECK(z.seminorm_0_alpha == 0.0);
    CHECK(z.sup_norm == 0.0);
    CHECK(z.holder == 0.0);

    // sup over s < t of (t - s)^alpha + (t - s)^alpha / alpha at t - s = 1, alpha = 1/2
    const GridPath t = sampled(0.0, 1.0, 256, [](double x) { return x; });
    CHECK(seminorm_0_alpha(t, 0.5) == doctest::Approx(3.0).epsilon(1e-9));

    const GridPath c = sampled(0.0, 1.0, 1 << 12, [](double) { return -1.5; });
    CHECK(norm_1_alpha(c, 0.35) == doctest::Approx(1.5 / 0.65).epsilon(1e-6));

    const NormBundle nb = fractional_norms(t, 0.5, 0.5, Interval{0.0, 0.5});
    CHECK(nb.sup_norm == doctest::Approx(0.5));
    CHECK(nb.holder == doctest::Approx(std::sqrt(0.5)));
    CHECK(nb.seminorm_0_alpha == doctest::Approx(3.0 * std::sqrt(0.5)).epsilon(1e-9));
    CHECK(nb.norm_1_alpha > 0.0);
}

TEST_CASE("delay norms") {
    const GridPath c = sampled(-1.0, 1.0, 512, [](double) { return -0.7; });
    const DelayNormBundle dc = delay_norms(c, 0.3, 1.0);
    CHECK(dc.norm_inf_t == doctest::Approx(0.7));
    CHECK(dc.norm_1_t == 0.0);
    CHECK(dc.norm_t == dc.norm_inf_t + dc.norm_1_t);

    // f(s) = s on [-1, 1], t = 1, alpha = 1/4: int_0^1 (1 - s)^{-1/4} ds = 4/3
    const GridPath lin = sampled(-1.0, 1.0, 1 << 12, [](double s) { return s; });
    const DelayNormBundle d = delay_norms(lin, 0.25, 1.0);
    CHECK(d.norm_inf_t == doctest::Approx(1.0));
    CHECK(d.norm_1_t == doctest::Approx(4.0 / 3.0).epsilon(1e-4));
    CHECK(d.norm_t == d.norm_inf_t + d.norm_1_t);

    CHECK_THROWS_AS(delay_norms(lin, 0.25, 0.0), DomainError);
    CHECK_THROWS_AS(delay_norms(lin, 0.25, -0.5), DomainError);
}

TEST_CASE("delay norms are non-decreasing in t") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        const Trig f = random_trig(rng);
        const GridPath p = sampled(-0.5, 1.0, 384, f);
        DelayNormBundle prev{};
        for (std::size_t k = 129; k < p.size(); k += 16) {
            const DelayNormBundle d = delay_norms(p, 0.35, p.time(k));
            CHECK(d.norm_inf_t >= prev.norm_inf_t);
            CHECK(d.norm_1_t >= prev.norm_1_t);
            CHECK(d.norm_t == d.norm_inf_t + d.norm_1_t);
            prev = d;
        }
    }
}
