#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "anderson/disorder.hpp"
#include "anderson/lattice.hpp"

namespace anderson::pam {

struct PamSolution {
    std::vector<double> u;       ///< e^{-tH} u0 per site
    std::string method;          ///< "krylov"
    double error_estimate = 0;   ///< accumulated step-doubling difference
    std::size_t steps = 0;
};

struct PamOptions {
    std::size_t krylov_dim = 30;
    std::size_t max_steps = 100000;
};

/// u(t) = e^{-tH} 1 with Dirichlet boundary, by Lanczos approximation of the
/// exponential action. Each step is accepted when one full step and two half
/// steps agree to tol * (dt/t) * max(1, |u|_inf); the half-step result is kept.
/// Throws ConvergenceError when the step budget runs out.
PamSolution solve_pam(const lattice::HamiltonianOperator& h, double t, double tol, const PamOptions& options = {});

/// Same with an arbitrary initial field.
PamSolution solve_pam(const lattice::HamiltonianOperator& h, double t, double tol, std::span<const double> initial,
                      const PamOptions& options = {});

/// Potential on all of Z^d, evaluated lazily by the walk.
struct PotentialField {
    std::function<double(std::span<const std::int64_t>)> value;
};

PotentialField constant_field(double c);

/// Box values; sites outside the box read `outside`.
PotentialField box_field(const lattice::BoxGeometry& geometry, std::vector<double> values, double outside = 0.0);

/// i.i.d. field that agrees with disorder::sample_potential(spec, geometry, seed)
/// inside the box and extends it to Z^d by hashing the point.
PotentialField random_field(const disorder::DistributionSpec& spec, std::uint64_t seed,
                            const lattice::BoxGeometry& geometry);

enum class WalkMode {
    killed,  ///< paths leaving the box contribute 0
    free,    ///< paths run on Z^d
};

struct AnnealedEstimate {
    double t = 0.0;
    double mean = 0.0;
    double se = 0.0;
    std::size_t n_disorder = 0;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
};

/// Quenched E^{x0}[exp(-int_0^t V(X_s) ds)] for the walk with holding rate 2d
/// and uniform neighbour choice. Paths are grouped in fixed blocks with
/// independent streams, so the result does not depend on `workers`.
AnnealedEstimate feynman_kac_mc(const PotentialField& potential, const lattice::BoxGeometry& geometry,
                                std::size_t x0, double t, std::size_t n_paths, std::uint64_t seed,
                                WalkMode mode = WalkMode::killed, unsigned workers = 1);

enum class Method { integrator, mc };

enum class Sampling {
    iid,         ///< realization i uses seed stream_seed(seed, i)
    stratified,  ///< every configuration of a finite-support law once, weighted
};

struct AnnealedOptions {
    Method method = Method::integrator;
    Sampling sampling = Sampling::iid;
    std::size_t n_paths = 10000;
    double tol = 1e-10;
    unsigned workers = 1;
};

/// Disorder average of u(x0, t) at the box center. The standard error is the
/// jackknife error over realizations with the inner MC errors added in
/// quadrature. Stratified sampling needs n_disorder equal to the number of
/// configurations and reports the exact weighted average.
AnnealedEstimate annealed_moment(const disorder::DistributionSpec& spec, const lattice::BoxGeometry& geometry,
                                 double t, std::size_t n_disorder, std::uint64_t seed,
                                 const AnnealedOptions& options = {});

/// |Lambda|^{-1} sum_i exp(-t E_i).
double heat_trace(std::span<const double> eigenvalues, double t);

/// Disorder average of the heat trace per volume, one full spectrum per
/// realization (seed stream_seed(seed, i)).
AnnealedEstimate annealed_heat_trace(const disorder::DistributionSpec& spec, const lattice::BoxGeometry& geometry,
                                     double t, std::size_t n_disorder, std::uint64_t seed, unsigned workers = 1);

/// Grid version sharing the spectra across t.
std::vector<AnnealedEstimate> annealed_heat_trace(const disorder::DistributionSpec& spec,
                                                  const lattice::BoxGeometry& geometry, std::span<const double> ts,
                                                  std::size_t n_disorder, std::uint64_t seed, unsigned workers = 1);

/// Grid version of the integrator moment: each realization is propagated
/// through the ascending t grid once.
std::vector<AnnealedEstimate> annealed_moment(const disorder::DistributionSpec& spec,
                                              const lattice::BoxGeometry& geometry, std::span<const double> ts,
                                              std::size_t n_disorder, std::uint64_t seed, double tol = 1e-10,
                                              unsigned workers = 1);

/// Mean and jackknife standard error of a sample mean.
std::pair<double, double> mean_and_se(std::span<const double> xs);

}  // namespace anderson::pam
