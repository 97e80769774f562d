#include <doctest.h>

#include <chrono>
#include <cmath>

#include "mixsdde/errors.hpp"
#include "mixsdde/fbm.hpp"
#include "mixsdde/stats.hpp"
#include "test_util.hpp"

using namespace mixsdde;
using namespace mixsdde::fbm;

TEST_CASE("fbm_covariance closed-form values") {
    CHECK(fbm_covariance(1.0, 2.0, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(fbm_covariance(0.0, 5.0, 0.75) == 0.0);
    // 0.5 * (1 + 2^1.5 - 1) = sqrt(2)
    CHECK(fbm_covariance(1.0, 2.0, 0.75) == doctest::Approx(1.4142135623730951).epsilon(1e-14));
    CHECK(fbm_covariance(2.0, 1.0, 0.75) == fbm_covariance(1.0, 2.0, 0.75));
    CHECK(fbm_covariance(0.7, 0.7, 0.9) == doctest::Approx(std::pow(0.7, 1.8)));
}

TEST_CASE("fbm_covariance rejects bad arguments") {
    CHECK_THROWS_AS(fbm_covariance(1.0, 2.0, 1.0), DomainError);
    CHECK_THROWS_AS(fbm_covariance(1.0, 2.0, 0.0), DomainError);
    CHECK_THROWS_AS(fbm_covariance(-0.1, 2.0, 0.7), DomainError);
    CHECK_THROWS_AS(fbm_covariance(0.1, -2.0, 0.7), DomainError);
}

TEST_CASE("fgn autocovariance reduces to white noise at H = 1/2") {
    CHECK(fgn_autocovariance(0, 0.5) == doctest::Approx(1.0));
    for (std::size_t k = 1; k < 10; ++k) CHECK(std::abs(fgn_autocovariance(k, 0.5)) < 1e-15);
    // positive correlation for H > 1/2
    CHECK(fgn_autocovariance(1, 0.75) == doctest::Approx(0.5 * (std::pow(2.0, 1.5) - 2.0)));
}

TEST_CASE("FbmParams validation") {
    FbmParams p;
    CHECK_NOTHROW(p.validate());
    p.hurst = 0.5;
    CHECK_THROWS_AS(p.validate(), ConstraintError);
    p.hurst = 1.0;
    CHECK_THROWS_AS(p.validate(), ConstraintError);
    p = {};
    p.n_steps = 1;
    CHECK_THROWS_AS(p.validate(), ConstraintError);
    p = {};
    p.horizon = 0.0;
    CHECK_THROWS_AS(p.validate(), ConstraintError);
    CHECK_THROWS_AS(FbmSampler{p}, ConstraintError);
}

TEST_CASE("sample_fbm grid, start value and determinism") {
    for (Method m : {Method::kCholesky, Method::kDaviesHarte}) {
        const FbmParams p{0.75, 100, 2.0, m};
        const GridPath a = sample_fbm(p, {42, 3});
        const GridPath b = sample_fbm(p, {42, 3});
        const GridPath c = sample_fbm(p, {42, 4});
        CHECK(a.size() == 101);
        CHECK(a.dt() == doctest::Approx(0.02));
        CHECK(a.t0() == 0.0);
        CHECK(a(0) == 0.0);
        CHECK(a == b);
        CHECK_FALSE(a == c);
    }
}

TEST_CASE("vector-valued samples have independent components") {
    const FbmSampler s({0.7, 32, 1.0, Method::kCholesky});
    const GridPath z = s.sample({5, 0}, 2);
    CHECK(z.dim() == 2);
    CHECK(z.size() == 33);
    CHECK(z(32, 0) != z(32, 1));
}

TEST_CASE("Brownian limit: increments have variance dt^{2H}") {
    // H = 1/2 itself lies outside the sampler's domain; just above it the
    // increments are white noise up to 1e-6.
    const std::size_t n = 64, paths = 2000;
    const FbmSampler s({0.5 + 1e-9, n, 1.0, Method::kCholesky});
    std::vector<double> sq;
    for (std::size_t i = 0; i < paths; ++i) {
        const GridPath b = s.sample({101, i});
        for (std::size_t k = 0; k < n; ++k) {
            const double inc = (b(k + 1) - b(k)) / std::sqrt(b.dt());
            sq.push_back(inc * inc);
        }
    }
    CHECK(std::abs(testutil::mean(sq) - 1.0) < 3.0 * testutil::stderr_of_mean(sq));
}

TEST_CASE("empirical covariance matches fbm_covariance within 3 standard errors") {
    const std::size_t n = 64, paths = 5000;
    const std::vector<std::pair<std::size_t, std::size_t>> pairs{{32, 64}, {8, 16}, {64, 64}, {1, 63}};
    for (Method m : {Method::kCholesky, Method::kDaviesHarte}) {
        const FbmSampler s({0.75, n, 1.0, m});
        std::vector<std::vector<double>> prod(pairs.size());
        for (std::size_t i = 0; i < paths; ++i) {
            const GridPath b = s.sample({202, i});
            for (std::size_t q = 0; q < pairs.size(); ++q) prod[q].push_back(b(pairs[q].first) * b(pairs[q].second));
        }
        for (std::size_t q = 0; q < pairs.size(); ++q) {
            const double exact = fbm_covariance(pairs[q].first / 64.0, pairs[q].second / 64.0, 0.75);
            CAPTURE(q);
            CHECK(std::abs(testutil::mean(prod[q]) - exact) < 3.0 * testutil::stderr_of_mean(prod[q]));
        }
    }
    // Cov(B(0.5), B(1)) at H = 0.75
    CHECK(fbm_covariance(0.5, 1.0, 0.75) == doctest::Approx(0.5));
}

TEST_CASE("cholesky and davies_harte agree in distribution (KS on B(T))") {
    const std::size_t paths = 10000;
    const FbmSampler c({0.8, 64, 1.0, Method::kCholesky});
    const FbmSampler d({0.8, 64, 1.0, Method::kDaviesHarte});
    std::vector<double> a, b;
    for (std::size_t i = 0; i < paths; ++i) {
        a.push_back(c.sample({303, i})(64));
        b.push_back(d.sample({304, i})(64));
    }
    CHECK(stats::ks_two_sample(a, b).p_value > 0.01);
}

TEST_CASE("self-similarity: B(cT) scaled by c^-H matches B(T) in law") {
    const double c = 3.0, h = 0.7;
    const FbmSampler unit({h, 64, 1.0, Method::kCholesky});
    const FbmSampler wide({h, 64, c, Method::kCholesky});
    std::vector<double> a, b;
    for (std::size_t i = 0; i < 3000; ++i) {
        a.push_back(unit.sample({405, i})(32));
        b.push_back(wide.sample({406, i})(32) / std::pow(c, h));
    }
    CHECK(stats::ks_two_sample(a, b).p_value > 0.05);
}

TEST_CASE("sample_wiener moments and independence") {
    std::vector<double> x;
    for (std::uint64_t s = 0; s < 100000; ++s) x.push_back(sample_wiener(1, 1.0, 1, {s, 0})(1));
    CHECK(std::abs(testutil::mean(x)) < 3.0 * std::pow(10.0, -2.5));
    std::vector<double> sq;
    for (double v : x) sq.push_back(v * v);
    CHECK(std::abs(testutil::mean(sq) - 1.0) < 3.0 * testutil::stderr_of_mean(sq));

    CHECK(sample_wiener(16, 2.0, 3, {9, 1}) == sample_wiener(16, 2.0, 3, {9, 1}));
    const GridPath w = sample_wiener(16, 2.0, 3, {9, 1});
    CHECK(w.size() == 17);
    CHECK(w.dim() == 3);
    CHECK(w(0, 2) == 0.0);

    const std::size_t m = 10000;
    std::vector<double> u, v;
    for (std::size_t i = 0; i < m; ++i) {
        const GridPath p = sample_wiener(4, 1.0, 2, {77, i});
        u.push_back(p(4, 0));
        v.push_back(p(4, 1));
    }
    CHECK(std::abs(stats::correlation(u, v)) < 3.0 / std::sqrt(static_cast<double>(m)));
}

TEST_CASE("W and Z streams of one replica are independent") {
    const std::size_t m = 10000;
    const FbmSampler s({0.75, 8, 1.0, Method::kCholesky});
    std::vector<double> u, v;
    for (std::size_t i = 0; i < m; ++i) {
        u.push_back(sample_wiener(8, 1.0, 1, {55, i})(8));
        v.push_back(s.sample({55, i})(8));
    }
    CHECK(std::abs(stats::correlation(u, v)) < 3.0 / std::sqrt(static_cast<double>(m)));
}

TEST_CASE("cholesky_lower reports the failing pivot") {
    Eigen::MatrixXd a(3, 3);
    a << 4, 2, 0, 2, 1, 0, 0, 0, 1;  // singular leading 2x2 block
    try {
        (void)cholesky_lower(a);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(e.index() == 1);
    }
    Eigen::MatrixXd spd(2, 2);
    spd << 4, 2, 2, 3;
    const Eigen::MatrixXd l = cholesky_lower(spd);
    CHECK((l * l.transpose() - spd).norm() < 1e-14);
}

TEST_CASE("holder_seminorm examples") {
    const GridPath flat = GridPath::constant(0.0, 0.1, 11, std::vector<double>{2.5});
    CHECK(holder_seminorm(flat, 0.5) == 0.0);
    const GridPath id = testutil::sampled(0.0, 1.0, 64, [](double t) { return t; });
    CHECK(holder_seminorm(id, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(holder_seminorm(id, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    // on [0.25, 0.5] the sup of (y - x)^{1/2} is 0.5
    CHECK(holder_seminorm(id, 0.5, std::pair{0.25, 0.5}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(holder_seminorm(id, 0.5, std::pair{0.3, 0.31}), DomainError);
    CHECK_THROWS_AS(holder_seminorm(id, 0.0), DomainError);
    CHECK_THROWS_AS(holder_seminorm(id, 1.5), DomainError);
}

TEST_CASE("Hoelder proxy: order below H stays bounded, order above H grows with the grid") {
    const std::size_t fine = 4096, paths = 100;
    const FbmSampler s({0.75, fine, 1.0, Method::kDaviesHarte});
    std::vector<double> lo_c, lo_f, hi_c, hi_f;
    for (std::size_t i = 0; i < paths; ++i) {
        const GridPath b = s.sample({606, i});
        const GridPath coarse = b.restrict_to(16);  // 256 steps
        lo_c.push_back(holder_seminorm(coarse, 0.70));
        hi_c.push_back(holder_seminorm(coarse, 0.80));
        lo_f.push_back(holder_seminorm(b, 0.70));
        hi_f.push_back(holder_seminorm(b, 0.80));
    }
    const double lo_growth = testutil::median(lo_f) / testutil::median(lo_c);
    const double hi_growth = testutil::median(hi_f) / testutil::median(hi_c);
    MESSAGE("median growth 256 -> 4096 steps: lambda 0.7 ", lo_growth, ", lambda 0.8 ", hi_growth);
    for (double v : lo_f) CHECK(std::isfinite(v));
    CHECK(hi_growth > 1.0);
    CHECK(lo_growth < hi_growth);
    // lambda = 0.8 exceeds H by 0.05: the grid proxy grows roughly like 16^0.05
    CHECK(hi_growth > lo_growth * 1.05);
}
