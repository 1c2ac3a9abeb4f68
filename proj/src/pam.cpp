#include "anderson/pam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "anderson/error.hpp"
#include "anderson/parallel.hpp"
#include "anderson/random.hpp"

namespace anderson::pam {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr std::size_t kBlockPaths = 4096;
constexpr std::uint64_t kOutsideKey = 1ULL << 63;
constexpr std::uint64_t kWalkSalt = 0x7a3c1e5f9b2d4861ULL;

// exp(-dt H) v restricted to the Krylov space of v of dimension <= m.
VectorXd krylov_exp(const lattice::HamiltonianOperator& h, const VectorXd& v, double dt, std::size_t m,
                    double scale) {
    const double beta = v.norm();
    const auto n = static_cast<Eigen::Index>(v.size());
    if (beta == 0.0) return VectorXd::Zero(n);
    m = std::min<std::size_t>(m, static_cast<std::size_t>(n));
    MatrixXd q(n, static_cast<Eigen::Index>(m));
    VectorXd alpha(static_cast<Eigen::Index>(m));
    VectorXd off = VectorXd::Zero(static_cast<Eigen::Index>(m));
    q.col(0) = v / beta;
    Eigen::Index dim = static_cast<Eigen::Index>(m);
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(m); ++j) {
        VectorXd w = h.apply(VectorXd(q.col(j)));
        alpha(j) = q.col(j).dot(w);
        w -= alpha(j) * q.col(j);
        if (j > 0) w -= off(j - 1) * q.col(j - 1);
        for (int pass = 0; pass < 2; ++pass) {
            const VectorXd c = q.leftCols(j + 1).transpose() * w;
            w -= q.leftCols(j + 1) * c;
        }
        if (j + 1 == static_cast<Eigen::Index>(m)) break;
        const double b = w.norm();
        if (b < 1e-13 * scale) {
            dim = j + 1;
            break;
        }
        off(j) = b;
        q.col(j + 1) = w / b;
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig;
    VectorXd diag = alpha.head(dim);
    VectorXd sub = off.head(std::max<Eigen::Index>(dim - 1, 0));
    eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const VectorXd coef =
        eig.eigenvectors() * (eig.eigenvalues().array() * -dt).exp().matrix().cwiseProduct(eig.eigenvectors().row(0).transpose());
    return beta * (q.leftCols(dim) * coef);
}

void check_finite(const PotentialField& f) {
    if (!f.value) throw DomainError("feynman_kac_mc: empty potential field");
}

struct Moments {
    double n = 0.0, mean = 0.0, m2 = 0.0;

    void add(double x) {
        n += 1.0;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }

    void merge(const Moments& o) {
        if (o.n == 0.0) return;
        const double total = n + o.n;
        const double d = o.mean - mean;
        mean += d * o.n / total;
        m2 += o.m2 + d * d * n * o.n / total;
        n = total;
    }
};

std::uint64_t point_key(std::span<const std::int64_t> x) {
    std::uint64_t h = 0x243f6a8885a308d3ULL;
    for (auto c : x) h = mix64(h ^ static_cast<std::uint64_t>(c));
    return h | kOutsideKey;
}

double quenched_u(const lattice::HamiltonianOperator& h, std::size_t x0, double t, double tol) {
    return solve_pam(h, t, tol).u[x0];
}

}  // namespace

PamSolution solve_pam(const lattice::HamiltonianOperator& h, double t, double tol, const PamOptions& options) {
    const std::vector<double> ones(h.size(), 1.0);
    return solve_pam(h, t, tol, ones, options);
}

PamSolution solve_pam(const lattice::HamiltonianOperator& h, double t, double tol, std::span<const double> initial,
                      const PamOptions& options) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("solve_pam: t must be finite and >= 0");
    if (!(tol > 0.0)) throw DomainError("solve_pam: tol must be > 0");
    if (initial.size() != h.size()) throw DomainError("solve_pam: initial field has the wrong size");
    if (options.krylov_dim < 2) throw DomainError("solve_pam: krylov_dim must be >= 2");

    PamSolution sol;
    sol.method = "krylov";
    VectorXd u = Eigen::Map<const VectorXd>(initial.data(), static_cast<Eigen::Index>(initial.size()));
    if (t == 0.0) {
        sol.u.assign(initial.begin(), initial.end());
        return sol;
    }
    const double lo = h.spectral_lower_bound();
    const double hi = h.spectral_upper_bound();
    const double scale = std::max({std::abs(lo), std::abs(hi), 1.0});
    const double spread = std::max(hi - lo, 1e-300);
    double dt = std::min(t, 0.5 * static_cast<double>(options.krylov_dim) / spread);
    const double floor_tol = 64.0 * std::numeric_limits<double>::epsilon();
    double s = 0.0;
    std::size_t attempts = 0;
    while (s < t) {
        if (++attempts > options.max_steps)
            throw ConvergenceError("solve_pam: step budget exhausted at s = " + std::to_string(s), sol.error_estimate);
        dt = std::min(dt, t - s);
        const VectorXd full = krylov_exp(h, u, dt, options.krylov_dim, scale);
        const VectorXd mid = krylov_exp(h, u, 0.5 * dt, options.krylov_dim, scale);
        const VectorXd half = krylov_exp(h, mid, 0.5 * dt, options.krylov_dim, scale);
        const double err = (full - half).lpNorm<Eigen::Infinity>();
        const double size = std::max(1.0, half.lpNorm<Eigen::Infinity>());
        const double allowed = std::max(tol * dt / t, floor_tol) * size;
        if (err <= allowed) {
            u = half;
            s = (t - (s + dt) <= 1e-15 * t) ? t : s + dt;
            sol.error_estimate += err;
            ++sol.steps;
            if (err < 0.05 * allowed) dt *= 2.0;
        } else {
            dt *= 0.5;
        }
    }
    sol.u.assign(u.data(), u.data() + u.size());
    return sol;
}

PotentialField constant_field(double c) {
    if (!std::isfinite(c)) throw DomainError("constant_field: value must be finite");
    return {[c](std::span<const std::int64_t>) { return c; }};
}

PotentialField box_field(const lattice::BoxGeometry& geometry, std::vector<double> values, double outside) {
    if (values.size() != geometry.size()) throw DomainError("box_field: value count does not match the box");
    return {[geometry, values = std::move(values), outside](std::span<const std::int64_t> x) {
        return geometry.contains(x) ? values[geometry.index(x)] : outside;
    }};
}

PotentialField random_field(const disorder::DistributionSpec& spec, std::uint64_t seed,
                            const lattice::BoxGeometry& geometry) {
    auto inside = disorder::sample_potential(spec, geometry, seed).values;
    return {[spec, seed, geometry, inside = std::move(inside)](std::span<const std::int64_t> x) {
        if (geometry.contains(x)) return inside[geometry.index(x)];
        return disorder::site_value(spec, seed, point_key(x));
    }};
}

AnnealedEstimate feynman_kac_mc(const PotentialField& potential, const lattice::BoxGeometry& geometry,
                                std::size_t x0, double t, std::size_t n_paths, std::uint64_t seed, WalkMode mode,
                                unsigned workers) {
    check_finite(potential);
    if (x0 >= geometry.size()) throw DomainError("feynman_kac_mc: x0 outside the box");
    if (n_paths < 1) throw DomainError("feynman_kac_mc: n_paths must be >= 1");
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("feynman_kac_mc: t must be finite and >= 0");

    const int d = geometry.dim();
    const double rate = 2.0 * d;
    const auto start = geometry.point(x0);
    const std::size_t blocks = (n_paths + kBlockPaths - 1) / kBlockPaths;
    std::vector<Moments> partial(blocks);
    parallel_for(blocks, workers, [&](std::size_t b) {
        Rng rng(stream_seed(seed, b));
        const std::size_t count = std::min(kBlockPaths, n_paths - b * kBlockPaths);
        Moments m;
        lattice::Point x;
        for (std::size_t p = 0; p < count; ++p) {
            x = start;
            double s = 0.0, integral = 0.0;
            bool alive = true;
            while (true) {
                const double hold = std::min(rng.exponential(rate), t - s);
                integral += potential.value(x) * hold;
                s += hold;
                if (s >= t) break;
                const auto k = rng.below(static_cast<std::uint64_t>(2 * d));
                x[k / 2] += (k % 2 == 0) ? 1 : -1;
                if (mode == WalkMode::killed && !geometry.contains(x)) {
                    alive = false;
                    break;
                }
            }
            m.add(alive ? std::exp(-integral) : 0.0);
        }
        partial[b] = m;
    });
    Moments total;
    for (const auto& m : partial) total.merge(m);

    AnnealedEstimate e;
    e.t = t;
    e.mean = total.mean;
    e.se = total.n > 1.0 ? std::sqrt(total.m2 / (total.n - 1.0) / total.n) : std::numeric_limits<double>::infinity();
    e.n_disorder = 1;
    e.n_paths = n_paths;
    e.seed = seed;
    return e;
}

std::pair<double, double> mean_and_se(std::span<const double> xs) {
    if (xs.empty()) throw DomainError("mean_and_se: empty sample");
    Moments m;
    for (double x : xs) m.add(x);
    // For the sample mean the leave-one-out jackknife reduces to s / sqrt(n).
    const double se = xs.size() > 1 ? std::sqrt(m.m2 / (m.n - 1.0) / m.n) : std::numeric_limits<double>::infinity();
    return {m.mean, se};
}

AnnealedEstimate annealed_moment(const disorder::DistributionSpec& spec, const lattice::BoxGeometry& geometry,
                                 double t, std::size_t n_disorder, std::uint64_t seed,
                                 const AnnealedOptions& options) {
    const std::size_t x0 = geometry.center();
    AnnealedEstimate e;
    e.t = t;
    e.seed = seed;
    e.n_disorder = n_disorder;
    e.n_paths = options.method == Method::mc ? options.n_paths : 0;

    auto evaluate = [&](const lattice::PotentialSample& pot, std::uint64_t walk_seed) -> std::pair<double, double> {
        if (options.method == Method::integrator)
            return {quenched_u(lattice::build_hamiltonian(geometry, pot), x0, t, options.tol), 0.0};
        const auto r = feynman_kac_mc(box_field(geometry, pot.values), geometry, x0, t, options.n_paths, walk_seed,
                                      WalkMode::killed, 1);
        return {r.mean, r.se};
    };

    if (options.sampling == Sampling::stratified) {
        const auto atoms = disorder::finite_support(spec);
        if (!atoms) throw DomainError("annealed_moment: stratified sampling needs a finite-support law");
        const std::size_t k = atoms->size();
        const std::size_t sites = geometry.size();
        double configs = std::pow(static_cast<double>(k), static_cast<double>(sites));
        if (configs > 1e7) throw CapExceeded("annealed_moment: too many configurations to enumerate");
        const auto count = static_cast<std::size_t>(configs);
        if (n_disorder != count)
            throw DomainError("annealed_moment: stratified sampling needs n_disorder = " + std::to_string(count));
        std::vector<double> value(count), weight(count), inner(count);
        parallel_for(count, options.workers, [&](std::size_t c) {
            lattice::PotentialSample pot;
            pot.spec_id = spec.id();
            pot.values.resize(sites);
            double w = 1.0;
            std::size_t code = c;
            for (std::size_t s = 0; s < sites; ++s) {
                const auto& [v, p] = (*atoms)[code % k];
                code /= k;
                pot.values[s] = v;
                w *= p;
            }
            const auto [u, se] = evaluate(pot, stream_seed(seed ^ kWalkSalt, c));
            value[c] = u;
            inner[c] = se;
            weight[c] = w;
        });
        double mean = 0.0, var = 0.0;
        for (std::size_t c = 0; c < count; ++c) {
            mean += weight[c] * value[c];
            var += weight[c] * weight[c] * inner[c] * inner[c];
        }
        e.mean = mean;
        e.se = std::sqrt(var);
        return e;
    }

    if (n_disorder < 2) throw DomainError("annealed_moment: n_disorder must be >= 2");
    std::vector<double> value(n_disorder), inner(n_disorder);
    parallel_for(n_disorder, options.workers, [&](std::size_t i) {
        const auto pot = disorder::sample_potential(spec, geometry, stream_seed(seed, i));
        const auto [u, se] = evaluate(pot, stream_seed(seed ^ kWalkSalt, i));
        value[i] = u;
        inner[i] = se;
    });
    const auto [mean, se] = mean_and_se(value);
    double inner_var = 0.0;
    for (double s : inner) inner_var += s * s;
    const double n = static_cast<double>(n_disorder);
    e.mean = mean;
    e.se = std::sqrt(se * se + inner_var / (n * n));
    return e;
}

std::vector<AnnealedEstimate> annealed_moment(const disorder::DistributionSpec& spec,
                                              const lattice::BoxGeometry& geometry, std::span<const double> ts,
                                              std::size_t n_disorder, std::uint64_t seed, double tol,
                                              unsigned workers) {
    if (n_disorder < 2) throw DomainError("annealed_moment: n_disorder must be >= 2");
    for (std::size_t j = 0; j < ts.size(); ++j)
        if (!(ts[j] >= 0.0) || (j > 0 && ts[j] < ts[j - 1]))
            throw DomainError("annealed_moment: t grid must be nonnegative and ascending");
    const std::size_t x0 = geometry.center();
    std::vector<std::vector<double>> u0(ts.size(), std::vector<double>(n_disorder));
    parallel_for(n_disorder, workers, [&](std::size_t i) {
        const auto h = lattice::build_hamiltonian(geometry, disorder::sample_potential(spec, geometry, stream_seed(seed, i)));
        std::vector<double> u(geometry.size(), 1.0);
        double previous = 0.0;
        for (std::size_t j = 0; j < ts.size(); ++j) {
            u = solve_pam(h, ts[j] - previous, tol, u).u;
            previous = ts[j];
            u0[j][i] = u[x0];
        }
    });
    std::vector<AnnealedEstimate> out;
    for (std::size_t j = 0; j < ts.size(); ++j) {
        const auto [mean, se] = mean_and_se(u0[j]);
        out.push_back({ts[j], mean, se, n_disorder, 0, seed});
    }
    return out;
}

double heat_trace(std::span<const double> eigenvalues, double t) {
    if (eigenvalues.empty()) throw DomainError("heat_trace: no eigenvalues");
    double sum = 0.0;
    for (double e : eigenvalues) sum += std::exp(-t * e);
    return sum / static_cast<double>(eigenvalues.size());
}

std::vector<AnnealedEstimate> annealed_heat_trace(const disorder::DistributionSpec& spec,
                                                  const lattice::BoxGeometry& geometry, std::span<const double> ts,
                                                  std::size_t n_disorder, std::uint64_t seed, unsigned workers) {
    if (n_disorder < 1) throw DomainError("annealed_heat_trace: n_disorder must be >= 1");
    if (geometry.size() > lattice::kDefaultDenseCap)
        throw CapExceeded("annealed_heat_trace: box exceeds the dense spectrum cap");
    for (double t : ts)
        if (!(t >= 0.0)) throw DomainError("annealed_heat_trace: t must be >= 0");
    std::vector<std::vector<double>> traces(ts.size(), std::vector<double>(n_disorder));
    parallel_for(n_disorder, workers, [&](std::size_t i) {
        const auto h = lattice::build_hamiltonian(geometry, disorder::sample_potential(spec, geometry, stream_seed(seed, i)));
        const auto spectrum = lattice::full_spectrum(h);
        for (std::size_t j = 0; j < ts.size(); ++j) traces[j][i] = heat_trace(spectrum.eigenvalues, ts[j]);
    });
    std::vector<AnnealedEstimate> out;
    for (std::size_t j = 0; j < ts.size(); ++j) {
        const auto [mean, se] = mean_and_se(traces[j]);
        out.push_back({ts[j], mean, se, n_disorder, 0, seed});
    }
    return out;
}

AnnealedEstimate annealed_heat_trace(const disorder::DistributionSpec& spec, const lattice::BoxGeometry& geometry,
                                     double t, std::size_t n_disorder, std::uint64_t seed, unsigned workers) {
    const double ts[] = {t};
    return annealed_heat_trace(spec, geometry, ts, n_disorder, seed, workers).front();
}

}  // namespace anderson::pam
