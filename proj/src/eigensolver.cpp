#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "anderson/error.hpp"
#include "anderson/lattice.hpp"
#include "anderson/random.hpp"

namespace anderson::lattice {

namespace {

void project_out(Eigen::VectorXd& v, const std::vector<Eigen::VectorXd>& basis, std::size_t count) {
    for (std::size_t pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < count; ++i) v -= basis[i].dot(v) * basis[i];
}

Eigen::VectorXd random_start(std::size_t n, Rng& rng) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform() - 0.5;
    return v;
}

}  // namespace

SpectralResult smallest_eigenvalues(const HamiltonianOperator& h, std::size_t k, double tol,
                                    const LanczosOptions& options) {
    const std::size_t n = h.size();
    if (k == 0 || k > n) throw DomainError("smallest_eigenvalues: need 1 <= k <= number of sites");
    if (!(tol > 0.0)) throw DomainError("smallest_eigenvalues: tolerance must be > 0");
    if (options.krylov_dim < 2) throw DomainError("smallest_eigenvalues: krylov_dim must be >= 2");

    Rng rng(options.seed);
    const double scale = std::max(std::abs(h.spectral_upper_bound()), std::abs(h.spectral_lower_bound()));
    std::vector<Eigen::VectorXd> locked;
    std::vector<double> values;
    std::vector<double> residuals;

    for (std::size_t j = 0; j < k; ++j) {
        Eigen::VectorXd start = random_start(n, rng);
        project_out(start, locked, locked.size());
        if (start.norm() == 0.0) throw ConvergenceError("smallest_eigenvalues: start vector vanished", 0.0);
        start.normalize();

        double best_residual = std::numeric_limits<double>::infinity();
        bool converged = false;
        for (std::size_t cycle = 0; cycle <= options.max_restarts && !converged; ++cycle) {
            const std::size_t m_max = std::min(options.krylov_dim, n - locked.size());
            // Rayleigh-Ritz on the full projection Q^T H Q rather than the
            // three-term recurrence, so a near-breakdown basis stays exact.
            std::vector<Eigen::VectorXd> q{start};
            Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m_max), static_cast<Eigen::Index>(m_max));
            for (std::size_t i = 0; i < m_max; ++i) {
                Eigen::VectorXd w = h.apply(q[i]);
                for (std::size_t j = 0; j <= i; ++j) {
                    const auto a = static_cast<Eigen::Index>(i), b = static_cast<Eigen::Index>(j);
                    t(a, b) = t(b, a) = q[j].dot(w);
                }
                if (i + 1 == m_max) break;
                project_out(w, locked, locked.size());
                project_out(w, q, q.size());
                const double norm = w.norm();
                if (norm < 1e-12 * scale) break;
                // Renormalising a small remainder amplifies its round-off, so
                // orthogonalise once more against everything.
                w /= norm;
                project_out(w, locked, locked.size());
                project_out(w, q, q.size());
                q.push_back(w.normalized());
            }
            const auto m = static_cast<Eigen::Index>(q.size());
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri(t.topLeftCorner(m, m));
            Eigen::VectorXd ritz = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
            for (Eigen::Index i = 0; i < m; ++i) ritz += tri.eigenvectors()(i, 0) * q[static_cast<std::size_t>(i)];
            project_out(ritz, locked, locked.size());
            ritz.normalize();
            const double rayleigh = ritz.dot(h.apply(ritz));
            const double residual = (h.apply(ritz) - rayleigh * ritz).norm();
            best_residual = std::min(best_residual, residual);
            if (residual <= tol) {
                locked.push_back(ritz);
                values.push_back(rayleigh);
                residuals.push_back(residual);
                converged = true;
            } else {
                start = ritz;
            }
        }
        if (!converged)
            throw ConvergenceError("smallest_eigenvalues: eigenpair " + std::to_string(j) +
                                       " missed tolerance within the restart budget",
                                   best_residual);
    }

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    SpectralResult result;
    Eigen::MatrixXd vectors(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
        result.eigenvalues.push_back(values[order[i]]);
        result.residuals.push_back(residuals[order[i]]);
        vectors.col(static_cast<Eigen::Index>(i)) = locked[order[i]];
    }
    result.eigenvectors = std::move(vectors);
    return result;
}

SpectralResult full_spectrum(const HamiltonianOperator& h, bool with_vectors, std::size_t cap) {
    const std::size_t n = h.size();
    if (n > cap)
        throw CapExceeded("full_spectrum: " + std::to_string(n) + " sites exceed the dense cap of " +
                          std::to_string(cap));
    const auto options = with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    if (h.geometry().dim() == 1) {
        const auto diag = h.diagonal();
        Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(diag.data(), static_cast<Eigen::Index>(n));
        Eigen::VectorXd sub = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n) - 1, -1.0);
        solver.computeFromTridiagonal(d, sub, options);
    } else {
        solver.compute(h.dense(), options);
    }
    if (solver.info() != Eigen::Success) throw ConvergenceError("full_spectrum: eigensolver failed", 0.0);

    SpectralResult result;
    result.eigenvalues.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + n);
    if (with_vectors) {
        result.eigenvectors = solver.eigenvectors();
        for (std::size_t i = 0; i < n; ++i) {
            const Eigen::VectorXd v = solver.eigenvectors().col(static_cast<Eigen::Index>(i));
            result.residuals.push_back((h.apply(v) - result.eigenvalues[i] * v).norm());
        }
    }
    return result;
}

}  // namespace anderson::lattice
