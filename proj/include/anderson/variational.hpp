#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "anderson/disorder.hpp"

namespace anderson::variational {

enum class Mode {
    exact,       ///< S(lambda, t) from the cumulant
    asymptotic,  ///< S replaced by c_g h_rho(lambda) g(t)
};

enum class Which { minus, plus };

struct VariationalParams {
    int dim = 1;
    double c_fk = 2.0;                      ///< Faber-Krahn constant
    std::optional<std::int64_t> ell_max;    ///< nullopt: max(500, 4 ceil(ell*))
    std::size_t h_grid = 1000;              ///< grid points for the l = 1 maximin
    Mode mode = Mode::exact;

    /// gamma = c_FK / (12 pi)^2.
    double gamma() const;

    /// c_FK = 2 in d = 1 and 1 otherwise.
    static VariationalParams defaults(int dim);
};

struct ArgMin {
    double value = 0.0;
    std::int64_t argmin = 1;
    std::int64_t ell_max = 1;
    bool truncated = false;  ///< minimum sits at ell_max
};

struct EllStar {
    double value = 0.0;  ///< +inf when the metadata is degenerate
    std::string note;
};

struct BoxSchedule {
    std::int64_t l = 1;
    double alpha = 1.0;
    double ell_star = 1.0;
};

struct BoundsReport {
    double t = 0.0;
    double G = 0.0;
    ArgMin chi_minus;
    ArgMin chi_plus;
    double lower = 0.0;  ///< G - t inf chi^-
    double upper = 0.0;  ///< G - t inf chi^+
    bool crossing = false;  ///< inf chi^+ > inf chi^-
    double g = 0.0;
    std::string regime;  ///< quantum | borderline | classical
};

/// Caches the law, its metadata and the parameters for repeated evaluation
/// over l and t.
class VariationalProblem {
public:
    VariationalProblem(disorder::DistributionSpec spec, VariationalParams params);

    const disorder::DistributionSpec& spec() const noexcept { return spec_; }
    const VariationalParams& params() const noexcept { return params_; }
    const disorder::RVMetadata& metadata() const noexcept { return metadata_; }

    /// S(lambda, t) in the configured mode.
    double deviation(double lambda, double t) const;

    /// 4d sin^2(pi/(2(l+1))) + S(l^{-d}, t).
    double chi_minus(std::int64_t l, double t) const;

    /// l = 1: max over h in [1/2, 1] of min[2d(1 - 2 sqrt(1-h)), gamma/2 + (1-h) S(1-h, t)];
    /// l > 1: gamma sin^2(pi/(2(l+1))) + S((4l)^{-d}, t)/4.
    double chi_plus(std::int64_t l, double t) const;

    /// Discrete minimum over l in [1, ell_max].
    ArgMin inf_chi(Which which, double t) const;

    EllStar ell_star(double t) const;
    BoxSchedule box_schedule(double t) const;
    BoundsReport sandwich_bounds(double t) const;

    /// Normalised regime constants chi^-_* and chi^+_* (rho >= 0 only).
    double classical_chi_star(Which which, double t) const;

    /// Unnormalised lemma bounds on inf chi^-(upper) and inf chi^+(lower):
    /// rho = 0 uses the two-branch forms with gamma/2, rho > 0 returns 2d and
    /// 2d(1 - 2 g(t)^{-1/2}).
    double lemma_bound(Which which, double t) const;

    std::int64_t resolved_ell_max(double t) const;

private:
    double lambda_deviation(double lambda, double t) const;

    disorder::DistributionSpec spec_;
    VariationalParams params_;
    disorder::RVMetadata metadata_;
};

/// Regime label from g(t): quantum below 0.1, classical above 10.
std::string regime_tag(const disorder::RVMetadata& m, double t);

}  // namespace anderson::variational
