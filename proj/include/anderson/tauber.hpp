#pragma once

#include <functional>

#include "anderson/disorder.hpp"

namespace anderson::tauber {

using ScalarFunction = std::function<double(double)>;

enum class Boundary {
    interior,
    at_zero,      ///< objective still decreasing as t -> 0
    at_infinity,  ///< objective still decreasing as t -> infinity
};

struct LegendreResult {
    double E = 0.0;
    double value = 0.0;   ///< smallest E t + f(t) over all probed t
    double t_star = 0.0;  ///< probe attaining value
    bool converged = false;
    Boundary boundary = Boundary::interior;
    double bracket_lo = 0.0;  ///< final bracket in t
    double bracket_hi = 0.0;
    std::size_t evaluations = 0;
};

struct BracketPolicy {
    double t0 = 1.0;
    double growth = 4.0;
    std::size_t max_expansions = 200;
    std::size_t starts = 8;  ///< extra log-spaced starts in t0 * [1e-7, 1e7]; 0 disables
};

/// inf over t > 0 of E t + f(t): geometric bracketing in log t followed by
/// golden-section search, repeated from several starts with the best kept.
LegendreResult legendre_inf(const ScalarFunction& f, double E, const BracketPolicy& policy = {});

/// I(E) = inf_t [E t + G(t)] with G the cumulant of the law.
LegendreResult rate_function(const disorder::DistributionSpec& spec, double E, const BracketPolicy& policy = {});

/// c t log(c t) - c t, the large-t head of the double exponential cumulant.
ScalarFunction double_exponential_head(double c);

struct ShiftedBounds {
    double lower = 0.0;  ///< C I(E - 2d chi^-_*)
    double upper = 0.0;  ///< I(E - 2d chi^+_*)
    double C = 1.0;
    LegendreResult at_minus;
    LegendreResult at_plus;
};

/// Rate-function bounds on log N(E) in the classical and borderline regimes,
/// with I taken as the (nonpositive) infimum.
ShiftedBounds shifted_rate_bounds(const disorder::DistributionSpec& spec, double E, double chi_minus_star,
                                  double chi_plus_star, int dim, double C = 1.0);

struct TauberBounds {
    double lower = 0.0;
    double upper = 0.0;
    double C1 = 1.0;  ///< B1^{1/(1-rho)}
    double C2 = 1.0;  ///< B2^{1/(1-rho)}
    LegendreResult legendre;
};

/// Bounded case, f in R_rho with 0 < rho < 1, B1 >= B2 > 0, E > 0:
/// C_i inf_t [E t - f(t)].
TauberBounds de_bruijn_bounds(const ScalarFunction& f, double rho, double B1, double B2, double E);

/// Unbounded case, f in R_rho with rho > 1, 0 < B1 <= B2, E <= 0:
/// C_i inf_t [E t + f(t)].
TauberBounds kasahara_bounds(const ScalarFunction& f, double rho, double B1, double B2, double E);

/// Double exponential case, no power scaling: inf_t [E t + B_i f(t)] directly
/// with f = c t log(c t) - c t and 0 < B1 <= B2.
TauberBounds double_exponential_bounds(double c, double B1, double B2, double E);

struct LifshitzEnvelope {
    double t_star = 0.0;         ///< root of g(t) = C E^{(2 - d rho)/2}
    double t_star_closed = 0.0;  ///< s g0(s)^{-1/rho}, s = (C E^{(2 - d rho)/2})^{1/rho}
    double envelope = 0.0;       ///< E^{-d/2 + 1 + 1/rho} g0(t*)^{-1/rho}
    double residual = 0.0;       ///< |g(t*)/target - 1|
};

/// Quantum-regime Lifshitz scale for -1 <= rho < 0, t* by bisection on log t.
LifshitzEnvelope lifshitz_envelope(const disorder::RVMetadata& metadata, double E, int dim, double C = 1.0);
LifshitzEnvelope lifshitz_envelope(const disorder::DistributionSpec& spec, double E, int dim, double C = 1.0);

}  // namespace anderson::tauber
