#include <doctest.h>

#include <cmath>

#include "mixsdde/errors.hpp"
#include "mixsdde/fbm.hpp"
#include "mixsdde/mollifier.hpp"
#include "mixsdde/solver.hpp"
#include "mixsdde/stats.hpp"
#include "test_util.hpp"

using namespace mixsdde;
using namespace mixsdde::solver;
using testutil::sampled;

namespace {

SolverConfig config(std::size_t n, double horizon = 1.0, double delay = 0.0) {
    SolverConfig c;
    c.n_steps = n;
    c.horizon = horizon;
    c.delay = delay;
    return c;
}

InitialCondition constant_eta(double v, double delay = 0.0, double dt = 1.0) {
    return make_initial_condition({InitialKind::kConstant, {v}, {}, {}}, delay, dt, 0.4);
}

GridPath zeros(std::size_t n, double horizon = 1.0) {
    return GridPath::zeros(0.0, horizon / static_cast<double>(n), n + 1, 1);
}

}  // namespace

TEST_CASE("zero coefficients keep the solution at eta(0)") {
    const CoefficientSpec s = CoefficientSpec::geometric(0.0, 0.0, 0.0);
    CoefficientSpec delayed = s;
    delayed.family = Family::kPointwiseDelay;
    delayed.tap = 0.25;
    const auto cfg = config(64, 1.0, 0.25);
    const InitialCondition eta =
        make_initial_condition({InitialKind::kLinear, {2.0}, {3.0}, {}}, 0.25, cfg.dt(), 0.4);
    const GridPath w = fbm::sample_wiener(64, 1.0, 1, {1, 0});
    const GridPath z = fbm::sample_fbm({0.75, 64, 1.0}, {1, 0});
    const GridPath x = euler_mixed_sdde(delayed, eta, w, z, cfg);
    CHECK(x.size() == 16 + 65);
    CHECK(x.t0() == doctest::Approx(-0.25));
    for (std::size_t k = 0; k <= 16; ++k) CHECK(x(k) == eta.eta(k));  // initial segment bitwise
    for (std::size_t k = 16; k < x.size(); ++k) CHECK(x(k) == 2.0);
}

TEST_CASE("one step of the recursion") {
    const double a = 0.5, b = 0.4, c = 0.3;
    const GridPath w(0.0, 0.5, 1, {0.0, 0.37});
    const GridPath z(0.0, 0.5, 1, {0.0, -0.21});
    const GridPath x = euler_mixed_sdde(CoefficientSpec::geometric(a, b, c), constant_eta(1.0), w, z, config(1, 0.5));
    CHECK(x.size() == 2);
    CHECK(x(1) == doctest::Approx(1.0 + a * 0.5 + b * 0.37 + c * -0.21).epsilon(1e-15));
}

TEST_CASE("one step with a point delay reads eta(-tau)") {
    CoefficientSpec s;
    s.family = Family::kPointwiseDelay;
    s.tap = 0.5;
    s.drift.lagged = Eigen::MatrixXd::Constant(1, 1, 2.0);
    s.diffusion = {ColumnMap{}};
    s.diffusion[0].offset = Eigen::VectorXd::Zero(1);
    s.driver = {ColumnMap{}};
    s.driver[0].lagged = Eigen::MatrixXd::Constant(1, 1, 1.0);
    const auto cfg = config(4, 1.0, 0.5);
    const InitialCondition eta = make_initial_condition({InitialKind::kLinear, {1.0}, {1.0}, {}}, 0.5, 0.25, 0.4);
    const GridPath w = zeros(4);
    const GridPath z = sampled(0.0, 1.0, 4, [](double t) { return t * t; });
    const GridPath x = euler_mixed_sdde(s, eta, w, z, cfg);
    // X(dt) = eta(0) + 2 eta(-0.5) dt + eta(-0.5) (Z(dt) - Z(0))
    CHECK(x(2) == 1.0);
    CHECK(x(2 + 1) == doctest::Approx(1.0 + 2.0 * 0.5 * 0.25 + 0.5 * 0.0625));
}

TEST_CASE("drivers sampled on a refinement are restricted to the solver grid") {
    const GridPath w = fbm::sample_wiener(64, 1.0, 1, {2, 0});
    const GridPath z = fbm::sample_fbm({0.75, 64, 1.0}, {2, 0});
    const auto spec = CoefficientSpec::geometric(0.5, 0.4, 0.3);
    const GridPath fine = euler_mixed_sdde(spec, constant_eta(1.0), w, z, config(16));
    const GridPath coarse = euler_mixed_sdde(spec, constant_eta(1.0), w.restrict_to(4), z.restrict_to(4), config(16));
    CHECK(fine == coarse);
    CHECK_THROWS_AS(euler_mixed_sdde(spec, constant_eta(1.0), w, z, config(24)), DomainError);
    CHECK_THROWS_AS(restrict_to_grid(w, 128, 1.0, "W"), DomainError);
    CHECK(restrict_to_grid(w, 8, 1.0, "W").size() == 9);
}

TEST_CASE("Euler scheme is deterministic") {
    const GridPath w = fbm::sample_wiener(128, 1.0, 1, {3, 0});
    const GridPath z = fbm::sample_fbm({0.75, 128, 1.0}, {3, 0});
    const auto spec = CoefficientSpec::geometric(0.5, 0.4, 0.3);
    CHECK(euler_mixed_sdde(spec, constant_eta(1.0), w, z, config(128)) ==
          euler_mixed_sdde(spec, constant_eta(1.0), w, z, config(128)));
}

TEST_CASE("explosion guard aborts with a diagnostic") {
    auto cfg = config(64);
    cfg.explosion_threshold = 100.0;
    const GridPath w = zeros(64), z = zeros(64);
    try {
        (void)euler_mixed_sdde(CoefficientSpec::geometric(20.0, 0.0, 0.0), constant_eta(1.0), w, z, cfg);
        FAIL("expected ExplosionError");
    } catch (const ExplosionError& e) {
        CHECK(e.step() > 0);
        CHECK(e.step() <= 64);
        CHECK(e.time() > 0.0);
        CHECK(static_cast<int>(e.exit_code()) == 4);
    }
}

TEST_CASE("solver configuration checks") {
    auto cfg = config(16, 1.0, 0.3);
    CHECK_THROWS(cfg.validate());
    cfg = config(0);
    CHECK_THROWS(cfg.validate());
    CHECK(config(16, 1.0, 0.25).delay_steps() == 4);
    CHECK(scheme_from_string("euler_ito") == Scheme::kEulerIto);
    CHECK_THROWS_AS(scheme_from_string("milstein"), ConstraintError);
    // eta must cover [-r, 0]
    const GridPath w = zeros(16), z = zeros(16);
    CoefficientSpec s = CoefficientSpec::geometric(0.1, 0.1, 0.1);
    s.family = Family::kPointwiseDelay;
    s.tap = 0.25;
    CHECK_THROWS(euler_mixed_sdde(s, constant_eta(1.0), w, z, config(16, 1.0, 0.25)));
}

TEST_CASE("geometric spec converges to the closed form on coupled paths") {
    const std::size_t n = 1 << 10, paths = 200;
    const fbm::FbmSampler sampler({0.75, n, 1.0});
    const auto spec = CoefficientSpec::geometric(0.5, 0.4, 0.3);
    std::vector<double> err;
    for (std::size_t i = 0; i < paths; ++i) {
        const GridPath w = fbm::sample_wiener(n, 1.0, 1, {500, i});
        const GridPath z = sampler.sample({500, i});
        const GridPath x = euler_mixed_sdde(spec, constant_eta(1.0), w, z, config(n));
        err.push_back(sup_distance(x, geometric_closed_form(0.5, 0.4, 0.3, 1.0, w, z)));
    }
    CHECK(testutil::mean(err) < 0.05);
}

TEST_CASE("geometric closed form") {
    const GridPath zero = zeros(8);
    const GridPath e = geometric_closed_form(1.0, 0.0, 0.0, 1.0, zero, zero);
    CHECK(e(8) == doctest::Approx(std::exp(1.0)).epsilon(1e-15));

    const GridPath z = sampled(0.0, 1.0, 8, [](double t) { return std::sin(5.0 * t); });
    const GridPath p = geometric_closed_form(0.0, 0.0, 1.0, 2.0, zero, z);
    for (std::size_t k = 0; k < p.size(); ++k) CHECK(p(k) == doctest::Approx(2.0 * std::exp(z(k))));

    // c = 0 is geometric Brownian motion: E X(1) = x0 e^a
    std::vector<double> end;
    for (std::uint64_t s = 0; s < 100000; ++s) {
        const GridPath w = fbm::sample_wiener(1, 1.0, 1, {s, 9});
        end.push_back(geometric_closed_form(0.5, 0.4, 0.0, 1.0, w, GridPath::zeros(0.0, 1.0, 2, 1))(1));
    }
    CHECK(std::abs(testutil::mean(end) - std::exp(0.5)) < 3.0 * testutil::stderr_of_mean(end));
}

TEST_CASE("mollifier closed-form cases") {
    const std::size_t N = 8, n = 256;
    const double lag = 1.0 / N;
    const GridPath c = GridPath::constant(0.0, 1.0 / n, n + 1, std::vector<double>{-3.0});
    const MollifiedDriver mc = mollify_driver(c, N);
    for (std::size_t k = 0; k < mc.path.size(); ++k)
        if (mc.path.time(k) >= lag - 1e-12) CHECK(mc.path(k) == doctest::Approx(-3.0).epsilon(1e-13));

    const GridPath t = sampled(0.0, 1.0, n, [](double x) { return x; });
    const MollifiedDriver mt = mollify_driver(t, N);
    for (std::size_t k = 0; k < mt.path.size(); ++k) {
        const double x = mt.path.time(k);
        if (x >= lag - 1e-12) {
            CHECK(mt.path(k) == doctest::Approx(x - 0.5 / N).epsilon(1e-12));
            CHECK(mt.rate(k) == doctest::Approx(1.0).epsilon(1e-12));
        } else {
            CHECK(mt.path(k) == doctest::Approx(N * x * x / 2.0).epsilon(1e-12));  // window (0, t]
        }
    }

    const GridPath big = GridPath::constant(0.0, 1.0 / n, n + 1, std::vector<double>{2.0 * N});
    const MollifiedDriver mb = mollify_driver(big, N);
    for (std::size_t k = 0; k < mb.path.size(); ++k)
        if (mb.path.time(k) >= lag - 1e-12) CHECK(mb.path(k) == doctest::Approx(double(N)));

    CHECK_THROWS_AS(mollify_driver(sampled(0.0, 1.0, 16, [](double x) { return x; }), N), ConstraintError);
    CHECK_THROWS_AS(mollify_driver(t, 0), ConstraintError);
}

TEST_CASE("non-grid-aligned windows use the exact fractional first cell") {
    // N = 3 on dt = 1/64: the window 1/3 is 21.33 cells
    const std::size_t N = 3, n = 64;
    const GridPath t = sampled(0.0, 1.0, n, [](double x) { return x * x; });
    const MollifiedDriver m = mollify_driver(t, N);
    // linear interpolant of x^2 on the grid integrated over [t - 1/3, t]
    const std::size_t k = 48;
    const double hi = t.time(k), lo = hi - 1.0 / N;
    double integral = 0.0;
    const int steps = 200000;
    for (int i = 0; i < steps; ++i) {
        const double u = lo + (i + 0.5) * (hi - lo) / steps;
        integral += t.interpolate(u) * (hi - lo) / steps;
    }
    CHECK(m.path(k) == doctest::Approx(N * integral).epsilon(1e-8));
    const WindowStart ws = window_start(k, 64.0 / 3.0);
    CHECK(ws.node == 26);
    CHECK(ws.fraction == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("mollified path is Lipschitz with constant 2 N^2 and tracks its rate") {
    const std::size_t N = 4, n = 1024;
    const GridPath z = fbm::sample_fbm({0.75, n, 1.0}, {8, 0});
    GridPath scaled = z;
    for (double& v : scaled.data()) v *= 20.0;  // force clamping
    const MollifiedDriver m = mollify_driver(scaled, N);
    for (std::size_t k = 1; k < m.path.size(); ++k) {
        const double slope = std::abs(m.path(k) - m.path(k - 1)) / m.path.dt();
        CHECK(slope <= 2.0 * N * N + 1e-9);
        CHECK(std::abs(m.rate(k)) <= 2.0 * N * N + 1e-9);
    }
}

TEST_CASE("mollified driver approaches Z as N grows") {
    const std::size_t n = 4096;
    const fbm::FbmSampler s({0.75, n, 1.0, fbm::Method::kDaviesHarte});
    for (std::size_t i = 0; i < 20; ++i) {
        const GridPath z = s.sample({10, i});
        double previous = INFINITY;
        for (std::size_t N : {4, 16, 64, 256}) {
            const GridPath zn = mollify_driver(z, N).path;
            double sup = 0.0;
            for (std::size_t k = 0; k < z.size(); ++k)
                if (z.time(k) >= 1.0 / N) sup = std::max(sup, std::abs(zn(k) - z(k)));
            CHECK(sup < previous);
            previous = sup;
        }
    }
}

TEST_CASE("clamp_to_ball") {
    std::vector<double> v{3.0, 4.0};
    clamp_to_ball(v, 10.0);
    CHECK(v[0] == 3.0);
    clamp_to_ball(v, 1.0);
    CHECK(v[0] == doctest::Approx(0.6));
    CHECK(v[1] == doctest::Approx(0.8));
}

TEST_CASE("Ito solver: trivial coefficients") {
    ItoSystem zero{1, 1,
                   [](double, const Segment&, const AdaptedDriver&, std::span<double> out) { out[0] = 0.0; },
                   [](double, const Segment&, const AdaptedDriver&, std::span<double> out) { out[0] = 0.0; }};
    const GridPath w = fbm::sample_wiener(32, 1.0, 1, {4, 0});
    const GridPath z = zeros(32);
    const GridPath y0 = euler_ito_sdde(zero, constant_eta(1.5), w, z, config(32));
    for (double v : y0.data()) CHECK(v == 1.5);

    ItoSystem unit = zero;
    unit.drift = [](double, const Segment&, const AdaptedDriver&, std::span<double> out) { out[0] = 1.0; };
    const GridPath y1 = euler_ito_sdde(unit, constant_eta(1.5), w, z, config(32));
    for (std::size_t k = 0; k < y1.size(); ++k) CHECK(y1(k) == doctest::Approx(1.5 + y1.time(k)).epsilon(1e-14));
}

TEST_CASE("Ito solver refuses to look ahead") {
    ItoSystem peek{1, 1,
                   [](double, const Segment&, const AdaptedDriver& ctx, std::span<double> out) {
                       out[0] = ctx.at(ctx.current_index() + 1);
                   },
                   [](double, const Segment&, const AdaptedDriver&, std::span<double> out) { out[0] = 0.0; }};
    const GridPath w = zeros(8);
    const GridPath z = sampled(0.0, 1.0, 8, [](double t) { return t; });
    CHECK_THROWS_AS(euler_ito_sdde(peek, constant_eta(0.0), w, z, config(8)), AdaptednessError);

    const AdaptedDriver view(z, 4);
    CHECK(view.at(4) == 0.5);
    CHECK(view.at_time(0.3) == doctest::Approx(0.3));
    CHECK_THROWS_AS(view.at(5), AdaptednessError);
    CHECK_THROWS_AS(view.at_time(0.51), AdaptednessError);
}

TEST_CASE("mixed solver with c = 0 equals the Ito solver bitwise") {
    CoefficientSpec s = CoefficientSpec::geometric(0.5, 0.4, 0.0);
    s.family = Family::kPointwiseDelay;
    s.nonlinearity = Nonlinearity::kSin;
    s.tap = 0.125;
    s.drift.lagged = Eigen::MatrixXd::Constant(1, 1, -0.3);
    s.driver[0].now.resize(0, 0);
    s.driver[0].offset = Eigen::VectorXd::Zero(1);
    const auto cfg = config(256, 1.0, 0.125);
    const InitialCondition eta = make_initial_condition({InitialKind::kLinear, {1.0}, {0.5}, {}}, 0.125, cfg.dt(), 0.4);
    for (std::size_t i = 0; i < 5; ++i) {
        const GridPath w = fbm::sample_wiener(256, 1.0, 1, {6, i});
        const GridPath z = fbm::sample_fbm({0.75, 256, 1.0}, {6, i});
        const GridPath mixed = euler_mixed_sdde(s, eta, w, z, cfg);
        const GridPath ito = euler_ito_sdde(ito_system(s, cfg.dt()), eta, w, z, cfg);
        CHECK(mixed == ito);
    }
}

TEST_CASE("mollified Ito solution approaches the mixed solution as N grows") {
    const std::size_t n = 1024;
    const auto spec = CoefficientSpec::geometric(0.5, 0.4, 0.3);
    const auto cfg = config(n);
    std::vector<double> means;
    for (std::size_t N : {4, 16, 64}) {
        std::vector<double> d;
        for (std::size_t i = 0; i < 40; ++i) {
            const GridPath w = fbm::sample_wiener(n, 1.0, 1, {12, i});
            const GridPath z = fbm::sample_fbm({0.75, n, 1.0}, {12, i});
            const GridPath x = euler_mixed_sdde(spec, constant_eta(1.0), w, z, cfg);
            const GridPath y = euler_ito_sdde(mollified_ito_system(spec, cfg.dt(), N), constant_eta(1.0), w, z, cfg);
            d.push_back(sup_distance(x, y));
        }
        means.push_back(testutil::mean(d));
    }
    CHECK(means[0] > means[1]);
    CHECK(means[1] > means[2]);
}

TEST_CASE("linear driver: mollified solution matches the shifted closed form") {
    const std::size_t n = 4096;
    const double a = 0.5, c = 0.3;
    const auto spec = CoefficientSpec::geometric(a, 0.0, c);
    const auto cfg = config(n);
    const GridPath w = zeros(n);
    const GridPath z = sampled(0.0, 1.0, n, [](double t) { return t; });
    const GridPath x = euler_mixed_sdde(spec, constant_eta(1.0), w, z, cfg);
    for (std::size_t N : {4, 16, 64}) {
        const GridPath y = euler_ito_sdde(mollified_ito_system(spec, cfg.dt(), N), constant_eta(1.0), w, z, cfg);
        // exact solutions are e^{at + cZ} and e^{at + cZ^N}, Z^N(t) = t - 1/2N past the first window
        double exact = 0.0;
        for (std::size_t k = 0; k <= n; ++k) {
            const double t = z.time(k);
            const double zn = t >= 1.0 / N ? t - 0.5 / N : N * t * t / 2.0;
            exact = std::max(exact, std::exp(a * t) * (std::exp(c * t) - std::exp(c * zn)));
        }
        CAPTURE(N);
        CHECK(sup_distance(x, y) == doctest::Approx(exact).epsilon(0.03));
        CHECK(exact <= c * std::exp(a + c) / (2.0 * N));  // Lipschitz bound of the flow in Z
    }
}
