#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mixsdde/grid_path.hpp"

namespace mixsdde {

// Exponents tying the driver regularity to the equation.
struct HolderParams {
    double hurst = 0.75;
    double gamma = 0.7;  // Hoelder order of the driver, below hurst
    double alpha = 0.35; // fractional order of the norms
    double beta = 0.9;   // time regularity of the driver coefficient
    double theta = 0.4;  // regularity of the initial condition

    // Throws ConstraintError naming the first violated constraint.
    void validate() const;

    // Smallest even integer >= 4 / (1 - 2 alpha).
    int quasi_contraction_power() const;
};

enum class InitialKind { kConstant, kLinear, kHolder };

std::string_view to_string(InitialKind kind) noexcept;
InitialKind initial_kind_from_string(std::string_view s);

// Declarative description of eta on [-r, 0].
//   constant: eta(u) = value
//   linear:   eta(u) = value + slope * u
//   holder:   eta(u) = value + amplitude * |u|^theta   (theta from HolderParams)
struct InitialSpec {
    InitialKind kind = InitialKind::kConstant;
    std::vector<double> value;      // length d
    std::vector<double> slope;      // linear only
    std::vector<double> amplitude;  // holder only

    void validate(std::size_t dim) const;
    // Same spec shifted by `shift` in every coordinate.
    InitialSpec shifted(double shift) const;
};

struct InitialCondition {
    GridPath eta;
    double holder_theta = 0.5;

    double delay() const noexcept { return eta.end_time() - eta.t0(); }
    // Grid Hoelder seminorm of eta at holder_theta (0 when eta is a single point).
    double holder_constant() const;
};

// Samples the spec on the grid {-r, -r + dt, ..., 0}. r must be a multiple of dt
// (r = 0 gives the single node 0).
InitialCondition make_initial_condition(const InitialSpec& spec, double delay, double dt, double theta);

}  // namespace mixsdde
