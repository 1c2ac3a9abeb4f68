#include "anderson/tauber.hpp"

#include <cmath>
#include <limits>

#include "anderson/error.hpp"

namespace anderson::tauber {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Search {
    const ScalarFunction& f;
    double E;
    LegendreResult best;

    double phi(double u) {
        const double t = std::exp(u);
        double v;
        try {
            v = E * t + f(t);
        } catch (const ConvergenceError&) {
            v = kInf;  // probe outside the range the function can be evaluated on
        }
        ++best.evaluations;
        if (std::isnan(v)) v = kInf;
        if (v < best.value || best.t_star == 0.0) {
            best.value = v;
            best.t_star = t;
        }
        return v;
    }
};

struct RunResult {
    Boundary boundary;
    double lo, hi;
};

RunResult run(Search& s, double u0, const BracketPolicy& p) {
    const double h = std::log(p.growth);
    double a = u0 - h, b = u0, c = u0 + h;
    double fa = s.phi(a), fb = s.phi(b), fc = s.phi(c);
    if (fa < fb) {
        std::size_t n = 0;
        while (fa < fb) {
            if (++n > p.max_expansions) return {Boundary::at_zero, std::exp(a), std::exp(b)};
            c = b, fc = fb;
            b = a, fb = fa;
            a = b - h;
            fa = s.phi(a);
        }
    } else if (fc < fb) {
        std::size_t n = 0;
        while (fc < fb) {
            if (++n > p.max_expansions) return {Boundary::at_infinity, std::exp(b), std::exp(c)};
            a = b, fa = fb;
            b = c, fb = fc;
            c = b + h;
            fc = s.phi(c);
        }
    }
    const double phi_ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = c - phi_ratio * (c - a), x2 = a + phi_ratio * (c - a);
    double f1 = s.phi(x1), f2 = s.phi(x2);
    for (int it = 0; it < 300 && c - a > 1e-12 * std::max(1.0, std::abs(b)); ++it) {
        if (f1 < f2) {
            c = x2;
            x2 = x1, f2 = f1;
            x1 = c - phi_ratio * (c - a);
            f1 = s.phi(x1);
        } else {
            a = x1;
            x1 = x2, f1 = f2;
            x2 = a + phi_ratio * (c - a);
            f2 = s.phi(x2);
        }
    }
    return {Boundary::interior, std::exp(a), std::exp(c)};
}

void check_scale_inputs(double rho, double B1, double B2) {
    if (!(B1 > 0.0) || !(B2 > 0.0)) throw DomainError("tauberian bounds: B1 and B2 must be positive");
    if (!std::isfinite(rho)) throw DomainError("tauberian bounds: rho must be finite");
}

}  // namespace

LegendreResult legendre_inf(const ScalarFunction& f, double E, const BracketPolicy& policy) {
    if (!f) throw DomainError("legendre_inf: empty function");
    if (!std::isfinite(E)) throw DomainError("legendre_inf: E must be finite");
    if (!(policy.t0 > 0.0) || !(policy.growth > 1.0)) throw DomainError("legendre_inf: need t0 > 0 and growth > 1");
    Search s{f, E, {}};
    s.best.E = E;
    s.best.value = kInf;

    const double u0 = std::log(policy.t0);
    std::vector<double> starts{u0};
    for (std::size_t k = 0; k < policy.starts; ++k) {
        const double frac = policy.starts == 1 ? 0.5 : static_cast<double>(k) / static_cast<double>(policy.starts - 1);
        starts.push_back(u0 + std::log(10.0) * (-7.0 + 14.0 * frac));
    }
    // Keep the run whose bracket holds the overall best probe.
    RunResult chosen{Boundary::interior, 0.0, 0.0};
    double chosen_value = kInf;
    for (double u : starts) {
        const double before = s.best.value;
        const auto r = run(s, u, policy);
        if (s.best.value < before || chosen_value == kInf) {
            chosen = r;
            chosen_value = s.best.value;
        }
    }
    s.best.boundary = chosen.boundary;
    s.best.bracket_lo = chosen.lo;
    s.best.bracket_hi = chosen.hi;
    s.best.converged = chosen.boundary == Boundary::interior && std::isfinite(s.best.value);
    return s.best;
}

LegendreResult rate_function(const disorder::DistributionSpec& spec, double E, const BracketPolicy& policy) {
    return legendre_inf([&spec](double t) { return disorder::cumulant(spec, t); }, E, policy);
}

ScalarFunction double_exponential_head(double c) {
    if (!(c > 0.0)) throw DomainError("double_exponential_head: c must be positive");
    return [c](double t) { return c * t * std::log(c * t) - c * t; };
}

ShiftedBounds shifted_rate_bounds(const disorder::DistributionSpec& spec, double E, double chi_minus_star,
                                  double chi_plus_star, int dim, double C) {
    if (dim < 1) throw DomainError("shifted_rate_bounds: dimension must be >= 1");
    if (!(C > 0.0)) throw DomainError("shifted_rate_bounds: C must be positive");
    ShiftedBounds b;
    b.C = C;
    b.at_minus = rate_function(spec, E - 2.0 * dim * chi_minus_star);
    b.at_plus = rate_function(spec, E - 2.0 * dim * chi_plus_star);
    b.lower = C * b.at_minus.value;
    b.upper = b.at_plus.value;
    return b;
}

TauberBounds de_bruijn_bounds(const ScalarFunction& f, double rho, double B1, double B2, double E) {
    check_scale_inputs(rho, B1, B2);
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("de_bruijn_bounds: rho must lie in (0, 1)");
    if (B1 < B2) throw DomainError("de_bruijn_bounds: need B1 >= B2");
    if (!(E > 0.0)) throw DomainError("de_bruijn_bounds: E must be positive");
    TauberBounds b;
    b.legendre = legendre_inf([&f](double t) { return -f(t); }, E);
    b.C1 = std::pow(B1, 1.0 / (1.0 - rho));
    b.C2 = std::pow(B2, 1.0 / (1.0 - rho));
    b.lower = b.C1 * b.legendre.value;
    b.upper = b.C2 * b.legendre.value;
    return b;
}

TauberBounds kasahara_bounds(const ScalarFunction& f, double rho, double B1, double B2, double E) {
    check_scale_inputs(rho, B1, B2);
    if (!(rho > 1.0)) throw DomainError("kasahara_bounds: rho must exceed 1");
    if (B1 > B2) throw DomainError("kasahara_bounds: need B1 <= B2");
    if (!(E <= 0.0)) throw DomainError("kasahara_bounds: E must be <= 0");
    TauberBounds b;
    b.legendre = legendre_inf(f, E);
    b.C1 = std::pow(B1, 1.0 / (1.0 - rho));
    b.C2 = std::pow(B2, 1.0 / (1.0 - rho));
    b.lower = b.C1 * b.legendre.value;
    b.upper = b.C2 * b.legendre.value;
    return b;
}

TauberBounds double_exponential_bounds(double c, double B1, double B2, double E) {
    check_scale_inputs(0.0, B1, B2);
    if (B1 > B2) throw DomainError("double_exponential_bounds: need B1 <= B2");
    const auto head = double_exponential_head(c);
    TauberBounds b;
    b.legendre = legendre_inf(head, E);
    const auto lo = legendre_inf([&](double t) { return B1 * head(t); }, E);
    const auto hi = legendre_inf([&](double t) { return B2 * head(t); }, E);
    b.lower = lo.value;
    b.upper = hi.value;
    b.C1 = b.legendre.value != 0.0 ? lo.value / b.legendre.value : 1.0;
    b.C2 = b.legendre.value != 0.0 ? hi.value / b.legendre.value : 1.0;
    return b;
}

LifshitzEnvelope lifshitz_envelope(const disorder::RVMetadata& m, double E, int dim, double C) {
    if (m.degenerate || !m.g || !m.g0) throw DomainError("lifshitz_envelope: needs nondegenerate metadata");
    if (!(m.rho >= -1.0 && m.rho < 0.0)) throw DomainError("lifshitz_envelope: rho must lie in [-1, 0)");
    if (!(E > 0.0)) throw DomainError("lifshitz_envelope: E must be positive");
    if (dim < 1 || !(C > 0.0)) throw DomainError("lifshitz_envelope: need d >= 1 and C > 0");
    const double rho = m.rho;
    const double target = C * std::pow(E, (2.0 - dim * rho) / 2.0);
    auto g = [&](double u) { return m.g(std::exp(u)); };

    // g is eventually decreasing; start from its largest value on a coarse scan.
    double u_peak = 0.0, g_peak = -kInf;
    for (double u = 0.0; u <= 700.0; u += 0.5) {
        const double v = g(u);
        if (v > g_peak) g_peak = v, u_peak = u;
    }
    if (!(g_peak >= target)) throw DomainError("lifshitz_envelope: root not bracketed (target above max g)");
    double lo = u_peak, hi = u_peak;
    while (g(hi) > target) {
        hi += 1.0;
        if (hi > 700.0) throw DomainError("lifshitz_envelope: root not bracketed (target below g at t = e^700)");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > target ? lo : hi) = mid;
    }
    LifshitzEnvelope r;
    const double u = 0.5 * (lo + hi);
    r.t_star = std::exp(u);
    r.residual = std::abs(g(u) / target - 1.0);
    const double s = std::pow(target, 1.0 / rho);
    r.t_star_closed = s * std::pow(m.g0(s), -1.0 / rho);
    r.envelope = std::pow(E, -0.5 * dim + 1.0 + 1.0 / rho) * std::pow(m.g0(r.t_star), -1.0 / rho);
    return r;
}

LifshitzEnvelope lifshitz_envelope(const disorder::DistributionSpec& spec, double E, int dim, double C) {
    return lifshitz_envelope(disorder::rv_metadata(spec), E, dim, C);
}

}  // namespace anderson::tauber
