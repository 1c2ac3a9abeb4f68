#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "anderson/disorder.hpp"
#include "anderson/lattice.hpp"

namespace anderson::ids {

/// Disorder-averaged eigenvalue counting function per volume on an energy
/// grid. The per-realization spectra are kept so Laplace transforms and
/// bootstrap resamples do not go through the grid.
struct IdsCurve {
    std::vector<double> energy;  ///< ascending
    std::vector<double> N;
    std::vector<double> se;
    std::size_t n_disorder = 0;
    lattice::BoxGeometry geometry{1, 1};
    std::string spec_id;
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> spectra;  ///< ascending eigenvalues per realization
};

/// edge + geometric offsets from min_offset to split (n_log points), then
/// linear up to top (n_lin points, edge + split excluded).
std::vector<double> make_energy_grid(double edge, double min_offset, double split, double top, std::size_t n_log,
                                     std::size_t n_lin);

/// One dense spectrum per realization (seed stream_seed(seed, i)).
IdsCurve empirical_ids(const disorder::DistributionSpec& spec, const lattice::BoxGeometry& geometry,
                       std::span<const double> energy_grid, std::size_t n_disorder, std::uint64_t seed,
                       unsigned workers = 1, std::size_t cap = lattice::kDefaultDenseCap);

/// Curve from given spectra; each spectrum must hold |Lambda| eigenvalues.
IdsCurve ids_from_spectra(std::span<const double> energy_grid, std::vector<std::vector<double>> spectra,
                          const lattice::BoxGeometry& geometry, std::string spec_id, std::uint64_t seed);

/// int e^{-tE} dN summed over the retained eigenvalues: the mean over
/// realizations of the per-volume heat trace.
double laplace_of_ids(const IdsCurve& curve, double t);

struct Window {
    double lo = 0.0;
    double hi = 0.0;
};

/// Counting floor 1/(|Lambda| n_disorder); fits drop N below a tenth of it.
double resolution_floor(const IdsCurve& curve);

/// Fit window: from the first grid energy whose N holds at least `min_counts`
/// eigenvalues per realization-average floor, up to the last energy with
/// N <= n_max.
Window resolution_window(const IdsCurve& curve, double min_counts = 10.0, double n_max = 1e-2);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    std::size_t points = 0;
};

/// Least-squares slope of log(-log N) against log E over grid points in the
/// window with floor/10 <= N < 1 and E > 0. Throws DomainError when fewer than
/// three points survive.
SlopeFit lifshitz_fit(std::span<const double> energy, std::span<const double> n, Window window, double floor = 0.0);
SlopeFit lifshitz_fit(const IdsCurve& curve, Window window);

struct LogCorrection {
    double c_a = 0.0;         ///< log N ~ c_a E^{-d/2}
    double c_b = 0.0;         ///< log N ~ c_b E^{-d/2} log E
    double residual_a = 0.0;  ///< sum of squared residuals
    double residual_b = 0.0;
    char preferred = 'A';
    std::size_t points = 0;
};

/// One-parameter least-squares fits of log N against E^{-d/2} (model A) and
/// E^{-d/2} log E (model B) on the same filtered points as lifshitz_fit.
LogCorrection log_correction_diagnostic(std::span<const double> energy, std::span<const double> n, int dim,
                                        Window window, double floor = 0.0);
LogCorrection log_correction_diagnostic(const IdsCurve& curve, Window window);

/// Fraction of bootstrap resamples (realizations drawn with replacement) in
/// which model B's residual does not exceed model A's.
double bootstrap_log_correction(const IdsCurve& curve, Window window, std::size_t resamples, std::uint64_t seed);

/// CSV with '#' metadata lines and columns E,N,se.
void write_csv(const IdsCurve& curve, std::ostream& out, const std::vector<std::string>& extra_metadata = {});

}  // namespace anderson::ids
