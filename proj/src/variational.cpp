#include "anderson/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "anderson/error.hpp"

namespace anderson::variational {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::int64_t kEllCap = 10'000'000;

double sin2(std::int64_t l) {
    const double s = std::sin(kPi / (2.0 * static_cast<double>(l + 1)));
    return s * s;
}

// Ceiling that ignores relative round-off of 1e-12 above an integer.
std::int64_t guarded_ceil(double x) { return static_cast<std::int64_t>(std::ceil(x * (1.0 - 1e-12))); }

}  // namespace

double VariationalParams::gamma() const { return c_fk / std::pow(12.0 * kPi, 2); }

VariationalParams VariationalParams::defaults(int dim) {
    VariationalParams p;
    p.dim = dim;
    p.c_fk = dim == 1 ? 2.0 : 1.0;
    return p;
}

VariationalProblem::VariationalProblem(disorder::DistributionSpec spec, VariationalParams params)
    : spec_(spec), params_(params), metadata_(disorder::rv_metadata(spec)) {
    if (params_.dim < 1) throw DomainError("variational: dimension must be >= 1");
    if (!(params_.c_fk > 0.0) || params_.c_fk > 2.0 * params_.dim)
        throw DomainError("variational: c_FK must lie in (0, 2d]");
    if (params_.ell_max && *params_.ell_max < 2) throw DomainError("variational: ell_max must be >= 2");
    if (params_.h_grid < 2) throw DomainError("variational: h_grid must be >= 2");
}

double VariationalProblem::deviation(double lambda, double t) const {
    if (params_.mode == Mode::exact) return disorder::s_deviation(spec_, lambda, t);
    if (metadata_.degenerate) return 0.0;
    return metadata_.c_g * disorder::h_rho(metadata_.rho, lambda) * metadata_.g(t);
}

// lambda S(lambda, t), continuous at lambda = 0.
double VariationalProblem::lambda_deviation(double lambda, double t) const {
    if (params_.mode == Mode::exact) {
        if (lambda == 0.0) return 0.0;
        return lambda * disorder::cumulant_rate(spec_, t) - disorder::cumulant(spec_, lambda * t) / t;
    }
    if (metadata_.degenerate) return 0.0;
    const double scale = metadata_.c_g * metadata_.g(t);
    if (lambda == 0.0) return metadata_.rho == -1.0 ? scale : 0.0;
    return lambda * disorder::h_rho(metadata_.rho, lambda) * scale;
}

double VariationalProblem::chi_minus(std::int64_t l, double t) const {
    if (l < 1) throw DomainError("chi_minus: l must be >= 1");
    if (!(t > 0.0)) throw DomainError("chi_minus: t must be > 0");
    const int d = params_.dim;
    const double kinetic = 4.0 * d * sin2(l);
    if (l == 1) return kinetic;
    return kinetic + deviation(std::pow(static_cast<double>(l), -d), t);
}

double VariationalProblem::chi_plus(std::int64_t l, double t) const {
    if (l < 1) throw DomainError("chi_plus: l must be >= 1");
    if (!(t > 0.0)) throw DomainError("chi_plus: t must be > 0");
    const int d = params_.dim;
    const double gamma = params_.gamma();
    if (l > 1) return gamma * sin2(l) + 0.25 * deviation(std::pow(4.0 * static_cast<double>(l), -d), t);

    auto objective = [&](double h) {
        const double lam = std::max(0.0, 1.0 - h);
        const double kinetic = 2.0 * d * (1.0 - 2.0 * std::sqrt(lam));
        const double potential = 0.5 * gamma + lambda_deviation(lam, t);
        return std::min(kinetic, potential);
    };
    const std::size_t n = params_.h_grid;
    auto node = [&](std::size_t i) { return 0.5 + 0.5 * static_cast<double>(i) / static_cast<double>(n); };
    std::size_t best_i = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i <= n; ++i) {
        const double v = objective(node(i));
        if (v >= best) {
            best = v;
            best_i = i;
        }
    }
    double a = node(best_i == 0 ? 0 : best_i - 1);
    double b = node(std::min(best_i + 1, n));
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
    double f1 = objective(x1), f2 = objective(x2);
    for (int it = 0; it < 100 && b - a > 1e-15; ++it) {
        if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = objective(x2);
        }
    }
    return std::max({best, f1, f2});
}

std::int64_t VariationalProblem::resolved_ell_max(double t) const {
    if (params_.ell_max) return *params_.ell_max;
    double star = std::numeric_limits<double>::infinity();
    try {
        star = ell_star(t).value;
    } catch (const DomainError&) {
    }
    if (!std::isfinite(star)) return 500;
    return std::max<std::int64_t>(500, 4 * static_cast<std::int64_t>(std::ceil(std::min(star, double(kEllCap)))));
}

ArgMin VariationalProblem::inf_chi(Which which, double t) const {
    ArgMin r;
    r.ell_max = resolved_ell_max(t);
    r.value = std::numeric_limits<double>::infinity();
    for (std::int64_t l = 1; l <= r.ell_max; ++l) {
        const double v = which == Which::minus ? chi_minus(l, t) : chi_plus(l, t);
        if (v < r.value) {
            r.value = v;
            r.argmin = l;
        }
    }
    r.truncated = r.argmin == r.ell_max;
    return r;
}

EllStar VariationalProblem::ell_star(double t) const {
    if (!(t > 0.0)) throw DomainError("ell_star: t must be > 0");
    if (metadata_.degenerate)
        return {std::numeric_limits<double>::infinity(), "degenerate law: S vanishes, no finite optimal length"};
    const double g = metadata_.g(t);
    if (!(g > 0.0)) throw DomainError("ell_star: auxiliary g(t) is not positive at t = " + std::to_string(t));
    const double rho = metadata_.rho;
    const int d = params_.dim;
    if (rho < 0.0) return {std::pow(g, 1.0 / (d * rho - 2.0)), "quantum: g(t)^{1/(d rho - 2)}"};
    if (rho == 0.0)
        return {std::max(1.0, std::sqrt(2.0 * kPi * kPi / (metadata_.c_g * g))),
                "borderline: max[1, (2 pi^2/(c_g g))^{1/2}]"};
    return {1.0, "classical: single peak"};
}

BoxSchedule VariationalProblem::box_schedule(double t) const {
    const auto star = ell_star(t);
    if (!std::isfinite(star.value)) throw DomainError("box_schedule: " + star.note);
    const double rho = metadata_.rho;
    const int d = params_.dim;
    BoxSchedule s;
    s.ell_star = star.value;
    if (rho == -1.0) {
        const double g0 = metadata_.g0(t);
        if (!(g0 > 0.0)) throw DomainError("box_schedule: g0(t) is not positive");
        s.alpha = std::pow(g0, 1.0 / (d * (d + 2.0)));
    } else if (rho < 0.0) {
        s.alpha = std::pow(t, -(1.0 + rho) / (d * (d * rho - 2.0)));
    } else {
        s.alpha = std::pow(t, 1.0 / (2.0 * d));
    }
    s.l = std::max<std::int64_t>(1, guarded_ceil(s.alpha * s.ell_star));
    return s;
}

std::string regime_tag(const disorder::RVMetadata& m, double t) {
    if (m.degenerate) return "quantum";
    const double g = m.g(t);
    if (g < 0.1) return "quantum";
    if (g > 10.0) return "classical";
    return "borderline";
}

BoundsReport VariationalProblem::sandwich_bounds(double t) const {
    BoundsReport r;
    r.t = t;
    r.G = disorder::cumulant(spec_, t);
    r.chi_minus = inf_chi(Which::minus, t);
    r.chi_plus = inf_chi(Which::plus, t);
    r.lower = r.G - t * r.chi_minus.value;
    r.upper = r.G - t * r.chi_plus.value;
    r.crossing = r.chi_plus.value > r.chi_minus.value;
    r.g = metadata_.degenerate ? 0.0 : metadata_.g(t);
    r.regime = regime_tag(metadata_, t);
    return r;
}

double VariationalProblem::classical_chi_star(Which which, double t) const {
    if (metadata_.degenerate || metadata_.rho < 0.0)
        throw DomainError("classical_chi_star: wrong regime, needs rho >= 0 (got " + std::to_string(metadata_.rho) + ")");
    const int d = params_.dim;
    const double gamma = params_.gamma();
    const double x = metadata_.c_g * metadata_.g(t);
    if (which == Which::minus) {
        if (x >= 2.0 * kPi * kPi) return 1.0;
        return 4.0 * x + x * std::log(2.0 * kPi * kPi / x);
    }
    if (x >= 2.0 * std::exp(2.0 * d) + gamma * kPi * kPi / (2.0 * d)) return 1.0 - 2.0 / std::sqrt(x);
    return std::min(gamma / (4.0 * d), d * x / 8.0 * (1.0 + std::log(64.0 * gamma * kPi * kPi / x)));
}

double VariationalProblem::lemma_bound(Which which, double t) const {
    if (metadata_.degenerate || metadata_.rho < 0.0)
        throw DomainError("lemma_bound: wrong regime, needs rho >= 0");
    const int d = params_.dim;
    const double gamma = params_.gamma();
    if (metadata_.rho > 0.0) {
        if (which == Which::minus) return 2.0 * d;
        return 2.0 * d * (1.0 - 2.0 / std::sqrt(metadata_.g(t)));
    }
    const double x = metadata_.c_g * metadata_.g(t);
    if (which == Which::minus) {
        if (x >= 2.0 * kPi * kPi) return 2.0 * d;
        return 8.0 * d * x + 2.0 * d * x * std::log(2.0 * kPi * kPi / x);
    }
    if (x >= 2.0 * std::exp(2.0 * d) + gamma * kPi * kPi / (2.0 * d)) return 2.0 * d - 4.0 * d / std::sqrt(x);
    return std::min(gamma / 2.0, d * x / 8.0 * (1.0 + std::log(64.0 * gamma * kPi * kPi / x)));
}

}  // namespace anderson::variational
