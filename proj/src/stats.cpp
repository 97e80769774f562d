#include "mixsdde/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mixsdde/errors.hpp"

namespace mixsdde::stats {

Summary summarize(std::span<const double> x) {
    Summary s;
    s.count = x.size();
    if (x.empty()) return s;
    const double n = static_cast<double>(x.size());
    // Fixed left-to-right order keeps results independent of how x was produced.
    double sum = 0.0;
    for (double v : x) sum += v;
    s.mean = sum / n;
    double ss = 0.0;
    for (double v : x) ss += (v - s.mean) * (v - s.mean);
    s.stddev = x.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    s.standard_error = s.stddev / std::sqrt(n);
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size() / 2;
    s.median = sorted.size() % 2 == 1 ? sorted[m] : 0.5 * (sorted[m - 1] + sorted[m]);
    s.min = sorted.front();
    s.max = sorted.back();
    return s;
}

Proportion wilson_interval(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0) throw DomainError("wilson_interval: no trials");
    if (successes > trials) throw DomainError("wilson_interval: more successes than trials");
    Proportion p;
    p.successes = successes;
    p.trials = trials;
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    p.estimate = phat;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (phat + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    p.lower = std::max(0.0, centre - half);
    p.upper = std::min(1.0, centre + half);
    // Exact containment at the extremes.
    if (successes == 0) p.lower = 0.0;
    if (successes == trials) p.upper = 1.0;
    p.lower = std::min(p.lower, phat);
    p.upper = std::max(p.upper, phat);
    return p;
}

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double n = static_cast<double>(x.size());
    const double m = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    const double ne = n * m / (n + m);
    const double se = std::sqrt(ne);
    return {d, kolmogorov_survival((se + 0.12 + 0.11 / se) * d)};
}

KsResult ks_one_sample(std::span<const double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw DomainError("ks_one_sample: empty sample");
    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    const double n = static_cast<double>(x.size());
    double d = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double f = cdf(x[i]);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    const double se = std::sqrt(n);
    return {d, kolmogorov_survival((se + 0.12 + 0.11 / se) * d)};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("correlation: need two equal samples of size >= 2");
    const Summary sx = summarize(x), sy = summarize(y);
    double c = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) c += (x[i] - sx.mean) * (y[i] - sy.mean);
    c /= static_cast<double>(x.size() - 1);
    return c / (sx.stddev * sy.stddev);
}

double ls_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("ls_slope: need two equal samples of size >= 2");
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw DomainError("ls_slope: constant abscissa");
    return sxy / sxx;
}

}  // namespace mixsdde::stats
