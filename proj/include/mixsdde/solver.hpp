#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>

#include "mixsdde/coefficients.hpp"
#include "mixsdde/grid_path.hpp"
#include "mixsdde/model.hpp"
#include "mixsdde/segment.hpp"

namespace mixsdde::solver {

enum class Scheme { kEulerMixed, kEulerIto };

std::string_view to_string(Scheme s) noexcept;
Scheme scheme_from_string(std::string_view s);

struct SolverConfig {
    std::size_t n_steps = 1024;
    double horizon = 1.0;
    double delay = 0.0;  // r, a multiple of dt (0 allowed for equations without memory)
    double explosion_threshold = 1e8;
    Scheme scheme = Scheme::kEulerMixed;

    double dt() const noexcept { return horizon / static_cast<double>(n_steps); }
    std::size_t delay_steps() const;
    void validate() const;
};

// Euler scheme for the mixed equation with memory:
//   X(t_{k+1}) = X(t_k) + a(t_k, X_{t_k}) dt + b(t_k, X_{t_k}) dW_k + c(t_k, X_{t_k}) dZ_k.
// Returns the path on [-r, T]; nodes on [-r, 0] are copied from eta. W and Z may be
// sampled on an integer refinement of the solver grid; they are restricted to it.
GridPath euler_mixed_sdde(const CoefficientSpec& spec, const InitialCondition& eta, const GridPath& wiener,
                          const GridPath& driver, const SolverConfig& cfg);

// Read access to a driver path that refuses to look ahead of the current step.
class AdaptedDriver {
public:
    AdaptedDriver(const GridPath& path, std::size_t current_index) : path_(&path), current_(current_index) {}

    std::size_t current_index() const noexcept { return current_; }
    double current_time() const noexcept { return path_->time(current_); }
    double dt() const noexcept { return path_->dt(); }
    std::size_t dim() const noexcept { return path_->dim(); }

    double at(std::size_t k, std::size_t j = 0) const;
    // Linear interpolation; t must not exceed the current time.
    double at_time(double t, std::size_t j = 0) const;

private:
    const GridPath* path_;
    std::size_t current_;
};

// Random drift f(t, psi, omega) and diffusion g(t, psi, omega). The driver view
// passed to them is positioned at the current step.
using DriftFn = std::function<void(double t, const Segment& psi, const AdaptedDriver& context, std::span<double> out)>;
using DiffusionFn =
    std::function<void(double t, const Segment& psi, const AdaptedDriver& context, std::span<double> out)>;

struct ItoSystem {
    std::size_t state_dim = 1;
    std::size_t wiener_dim = 1;
    DriftFn drift;
    DiffusionFn diffusion;  // d x m, column-major
};

// Euler-Maruyama for an Ito delay equation with adapted random coefficients.
// `context` is the random environment (e.g. the driver Z) the coefficients may
// read up to the current time; it must live on the solver grid or a refinement.
GridPath euler_ito_sdde(const ItoSystem& system, const InitialCondition& eta, const GridPath& wiener,
                        const GridPath& context, const SolverConfig& cfg);

// Drift a(t, psi) and diffusion b(t, psi) of a coefficient spec as Ito coefficients.
ItoSystem ito_system(const CoefficientSpec& spec, double dt);

// Ito system with drift a + c * dZ^N/dt for the mollified driver at level N.
ItoSystem mollified_ito_system(const CoefficientSpec& spec, double dt, std::size_t level);

// x0 exp((a - b^2/2) t + b W(t) + c Z(t)) on the grid of W (Z restricted to it).
GridPath geometric_closed_form(double a, double b, double c, double x0, const GridPath& wiener,
                               const GridPath& driver);

// Restriction of a path sampled from 0 on a refinement of the solver grid.
GridPath restrict_to_grid(const GridPath& path, std::size_t n_steps, double horizon, const char* what);

}  // namespace mixsdde::solver
