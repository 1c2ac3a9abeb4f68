#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "anderson/lattice.hpp"

namespace anderson::disorder {

enum class Family { uniform01, bernoulli, exponential, weibull_tail, double_exponential, point_mass };

/// Single-site law of the potential. Construct through the factory functions,
/// which validate the parameter domain.
///
/// Concrete laws:
///   uniform01            V ~ U(0, 1)
///   bernoulli(p0, a)     P[V = 0] = p0, P[V = a] = 1 - p0, a >= 0
///   exponential(theta)   density theta e^{-theta v} on v > 0
///   weibull_tail(a, C)   P[V < E] = exp(-C (-E)^a) for E < 0, V < 0 a.s.
///   double_exponential(c) P[V < E] = exp(-e^{-E/c}) on all of R
///   point_mass(v)        V = v
struct DistributionSpec {
    Family family = Family::uniform01;
    double p1 = 0.0;  ///< p0 | theta | alpha | c | v
    double p2 = 0.0;  ///< a  | -     | C     | - | -

    /// Stable identifier such as "bernoulli(p0=0.5,a=1)".
    std::string id() const;

    bool operator==(const DistributionSpec&) const = default;
};

DistributionSpec uniform01();
DistributionSpec bernoulli(double p0, double a);
DistributionSpec exponential(double theta);
DistributionSpec weibull_tail(double alpha, double c);
DistributionSpec double_exponential(double c);
DistributionSpec point_mass(double v);

std::string family_name(Family f);
/// Builds a spec from a family name and parameter map; throws DomainError on
/// unknown names, missing parameters or out-of-domain values.
DistributionSpec make_spec(const std::string& family, const std::vector<std::pair<std::string, double>>& params);

double cdf(const DistributionSpec& spec, double x);
/// Inverse CDF at u in (0, 1).
double quantile(const DistributionSpec& spec, double u);
double mean(const DistributionSpec& spec);

/// Atoms and probabilities for laws with finite support, nullopt otherwise.
std::optional<std::vector<std::pair<double, double>>> finite_support(const DistributionSpec& spec);

/// count i.i.d. draws from a single stream seeded by `seed`.
std::vector<double> sample(const DistributionSpec& spec, std::uint64_t seed, std::size_t count);

/// Value at a site of an unbounded field, derived from (seed, key) alone so
/// that lazily evaluated fields are reproducible in any visiting order.
double site_value(const DistributionSpec& spec, std::uint64_t seed, std::uint64_t key);

/// One realization on a box; value at site x is site_value(spec, seed, x).
lattice::PotentialSample sample_potential(const DistributionSpec& spec, const lattice::BoxGeometry& geometry,
                                          std::uint64_t seed);

/// G(t) = log <exp(-t V)>, t >= 0.
double cumulant(const DistributionSpec& spec, double t);

/// G(t)/t for t > 0 and -<V> at t = 0, without cancellation at small t.
double cumulant_rate(const DistributionSpec& spec, double t);

/// S(lambda, t) = G(t)/t - G(lambda t)/(lambda t), lambda in (0, 1], t > 0.
double s_deviation(const DistributionSpec& spec, double lambda, double t);

/// -log(lambda) for rho = 0, (1 - lambda^rho)/rho otherwise.
double h_rho(double rho, double lambda);

struct RVMetadata {
    double rho = 0.0;
    double c_g = 0.0;
    std::function<double(double)> g;   ///< auxiliary function, g(t) = t^rho g0(t)
    std::function<double(double)> g0;  ///< slowly varying part
    bool degenerate = false;           ///< S vanishes identically
    bool estimated = false;            ///< fitted rather than known in closed form
    double fit_residual = 0.0;         ///< RMS log-ratio of the fit, 0 when not fitted
};

RVMetadata rv_metadata(const DistributionSpec& spec);

struct EmpiricalCumulant {
    double value = 0.0;
    double se = 0.0;  ///< jackknife standard error
};

EmpiricalCumulant empirical_cumulant(std::span<const double> samples, double t);

}  // namespace anderson::disorder
