#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mixsdde::stats {

// 97.5% standard normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;          // sample standard deviation (n - 1)
    double standard_error = 0.0;  // stddev / sqrt(n)
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
};

Summary summarize(std::span<const double> x);

struct Proportion {
    std::size_t successes = 0;
    std::size_t trials = 0;
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

// Wilson score interval for successes out of trials.
Proportion wilson_interval(std::size_t successes, std::size_t trials, double z = kZ95);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// Two-sample Kolmogorov-Smirnov test (asymptotic p-value).
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);
// One-sample test against a continuous cdf.
KsResult ks_one_sample(std::span<const double> x, const std::function<double(double)>& cdf);
// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

double normal_cdf(double x);

// Sample Pearson correlation.
double correlation(std::span<const double> x, std::span<const double> y);

// Least-squares slope of y against x.
double ls_slope(std::span<const double> x, std::span<const double> y);

}  // namespace mixsdde::stats
