#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mixsdde/grid_path.hpp"

namespace mixsdde::frac {

// A closed interval [a, b]; operations taking one restrict their grid inputs
// to it (a and b must be grid nodes).
struct Interval {
    double a = 0.0;
    double b = 1.0;
};

struct NormBundle {
    double norm_1_alpha = 0.0;       // ||f||_{1,alpha;[a,b]}
    double seminorm_0_alpha = 0.0;   // ||f||_{0,alpha;[a,b]}
    double sup_norm = 0.0;           // ||f||_{a,b,infinity}
    double holder = 0.0;             // ||f||_{a,b,lambda}
};

struct DelayNormBundle {
    double norm_inf_t = 0.0;
    double norm_1_t = 0.0;
    double norm_t = 0.0;  // always norm_inf_t + norm_1_t
};

// Sub-path of `path` over `interval`, or the path itself when no interval is given.
GridPath restrict_to_interval(const GridPath& path, std::optional<Interval> interval);

// All grid operations below treat the input as its piecewise-linear
// interpolant and integrate the singular kernels exactly against it.

// (D^alpha_{a+} f)(x) at a single point x in (a, b] where [a, b] spans f.
double forward_rl_derivative_at(const GridPath& f, double alpha, double x);
// Real-valued (D^{1-alpha}_{b-} g_{b-})(x), g_{b-} = g - g(b), at x in [a, b).
double backward_rl_derivative_at(const GridPath& g, double alpha, double x);

// Forward derivative at the nodes a + h, ..., b (the node x = a is excluded).
GridPath forward_rl_derivative(const GridPath& f, double alpha, std::optional<Interval> interval = std::nullopt);
// Backward derivative at the nodes a, ..., b - h (the node x = b is excluded).
GridPath backward_rl_derivative(const GridPath& g, double alpha, std::optional<Interval> interval = std::nullopt);

// Generalized Lebesgue-Stieltjes integral of f against g over the common grid.
double gls_integral(const GridPath& f, const GridPath& g, double alpha,
                    std::optional<Interval> interval = std::nullopt);

// gls_integral together with the grid norms that bound it, evaluated on the
// grid and on every second node. A growth exponent log2(fine / coarse) above
// 0.25 for either norm flags a proxy that does not settle under refinement
// (e.g. a path with a jump), in which case the integral is not trustworthy.
struct GlsDiagnostics {
    double integral = 0.0;
    double norm_f = 0.0;         // ||f||_{1,alpha}
    double seminorm_g = 0.0;     // ||g||_{0,alpha}
    double growth_f = 0.0;       // log2 of the fine / coarse ratio
    double growth_g = 0.0;
    bool norms_unbounded = false;
};
GlsDiagnostics gls_integral_checked(const GridPath& f, const GridPath& g, double alpha,
                                    std::optional<Interval> interval = std::nullopt);

enum class RsRule { kLeft, kMidpoint };

double riemann_stieltjes_integral(const GridPath& f, const GridPath& g, RsRule rule,
                                  std::optional<Interval> interval = std::nullopt);

// C_{lambda,mu} = (1 - 2^{1-lambda-mu})^{-1}.
double young_love_constant(double lambda, double mu);
double young_love_bound(const GridPath& f, const GridPath& g, double lambda, double mu,
                        std::optional<Interval> interval = std::nullopt);

double norm_1_alpha(const GridPath& f, double alpha, std::optional<Interval> interval = std::nullopt);
double seminorm_0_alpha(const GridPath& g, double alpha, std::optional<Interval> interval = std::nullopt);
NormBundle fractional_norms(const GridPath& f, double alpha, double lambda,
                            std::optional<Interval> interval = std::nullopt);

// Delay norms at time t of a path defined on [-r, t'] with t' >= t; -r is the
// path's first node. t must be a positive grid node.
DelayNormBundle delay_norms(const GridPath& f, double alpha, double t);

}  // namespace mixsdde::frac
