#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace anderson::lattice {

/// Integer lattice point in Z^d.
using Point = std::vector<std::int64_t>;

/// Finite cube {0, ..., n-1}^d of Z^d with Dirichlet exterior.
///
/// Sites are indexed lexicographically with axis 0 varying fastest, so the
/// site index of x is sum_j x_j n^j. Exterior sites are never indexed; they
/// only enter through the boundary deficit (2d minus the interior degree).
class BoxGeometry {
public:
    BoxGeometry(int dim, std::int64_t side);

    int dim() const noexcept { return dim_; }
    std::int64_t side() const noexcept { return side_; }
    std::size_t size() const noexcept { return size_; }

    bool contains(std::span<const std::int64_t> point) const noexcept;
    std::size_t index(std::span<const std::int64_t> point) const;
    Point point(std::size_t site) const;

    /// Site with every coordinate equal to floor(n/2); the lattice origin of
    /// the centred box when n is odd.
    std::size_t center() const;

    int interior_degree(std::size_t site) const noexcept;
    int exterior_degree(std::size_t site) const noexcept { return 2 * dim_ - interior_degree(site); }

    /// Calls f(neighbor_site) for every nearest neighbour inside the box.
    template <class F>
    void for_each_neighbor(std::size_t site, F&& f) const {
        for (int j = 0; j < dim_; ++j) {
            const auto stride = strides_[static_cast<std::size_t>(j)];
            const auto coord = static_cast<std::int64_t>((site / stride) % static_cast<std::size_t>(side_));
            if (coord > 0) f(site - stride);
            if (coord + 1 < side_) f(site + stride);
        }
    }

    bool operator==(const BoxGeometry&) const = default;

private:
    int dim_;
    std::int64_t side_;
    std::size_t size_;
    std::vector<std::size_t> strides_;
};

/// Sites per axis of the centred cube {x : |x|_inf <= radius}.
constexpr std::int64_t sites_from_radius(std::int64_t radius) noexcept { return 2 * radius + 1; }

/// Largest radius r with 2r+1 <= sites; the inverse of sites_from_radius on odd sizes.
constexpr std::int64_t radius_from_sites(std::int64_t sites) noexcept { return (sites - 1) / 2; }

/// One realization of the random potential restricted to a box.
struct PotentialSample {
    std::vector<double> values;
    std::uint64_t seed = 0;
    std::string spec_id;
};

/// Sparse action of -Delta + V on a box with Dirichlet boundary:
/// (H u)(x) = 2d u(x) - sum_{y in box, |x-y|=1} u(y) + V(x) u(x).
class HamiltonianOperator {
public:
    explicit HamiltonianOperator(BoxGeometry geometry);
    HamiltonianOperator(BoxGeometry geometry, PotentialSample potential);

    const BoxGeometry& geometry() const noexcept { return geometry_; }
    std::size_t size() const noexcept { return geometry_.size(); }

    /// 2d + V(x) per site.
    std::span<const double> diagonal() const noexcept { return diagonal_; }
    /// Potential values; empty when the operator was built without one.
    std::span<const double> potential() const noexcept { return potential_.values; }
    const PotentialSample& potential_sample() const noexcept { return potential_; }

    void apply(std::span<const double> in, std::span<double> out) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& in) const;

    Eigen::MatrixXd dense() const;
    double trace() const noexcept;
    /// Gershgorin bound on the spectrum: every eigenvalue lies in [min V, max(2d + V) + 2d].
    double spectral_upper_bound() const noexcept;
    double spectral_lower_bound() const noexcept;

private:
    BoxGeometry geometry_;
    PotentialSample potential_;
    std::vector<double> diagonal_;
};

HamiltonianOperator build_hamiltonian(const BoxGeometry& geometry);
HamiltonianOperator build_hamiltonian(const BoxGeometry& geometry, const PotentialSample& potential);

/// Smallest eigenvalue of the Dirichlet Laplacian on a cube with n sites per
/// axis: 4d sin^2(pi / (2(n+1))).
double laplacian_ground_energy(int dim, std::int64_t side);

/// Normalised ground state prod_j sqrt(2/(n+1)) sin(pi (x_j+1)/(n+1)).
std::vector<double> laplacian_ground_state(int dim, std::int64_t side);

struct SpectralResult {
    std::vector<double> eigenvalues;               ///< ascending
    std::optional<Eigen::MatrixXd> eigenvectors;   ///< column i pairs with eigenvalues[i]
    std::vector<double> residuals;                 ///< ||H v - lambda v||_2 per pair, when vectors were formed
};

struct LanczosOptions {
    std::uint64_t seed = 0x5eed;
    std::size_t krylov_dim = 120;     ///< basis size per restart cycle
    std::size_t max_restarts = 400;
};

/// k smallest eigenpairs by restarted Lanczos with full reorthogonalisation
/// and explicit deflation of converged vectors (finds degenerate copies).
/// Throws ConvergenceError if a pair misses `tol` within the restart budget.
SpectralResult smallest_eigenvalues(const HamiltonianOperator& h, std::size_t k, double tol,
                                    const LanczosOptions& options = {});

inline constexpr std::size_t kDefaultDenseCap = 4096;

/// All eigenvalues (and optionally eigenvectors) by dense diagonalisation;
/// the d = 1 case uses the tridiagonal QL path. Throws CapExceeded above `cap`.
SpectralResult full_spectrum(const HamiltonianOperator& h, bool with_vectors = false,
                             std::size_t cap = kDefaultDenseCap);

/// Probability vector on the sites of a box.
class OccupationMeasure {
public:
    /// Throws DomainError unless weights are nonnegative and sum to 1 within 1e-12.
    OccupationMeasure(BoxGeometry geometry, std::vector<double> weights);

    /// p = phi^2 / ||phi||^2.
    static OccupationMeasure from_amplitude(BoxGeometry geometry, std::span<const double> amplitude);
    static OccupationMeasure point_mass(BoxGeometry geometry, std::size_t site);
    static OccupationMeasure uniform(BoxGeometry geometry);

    const BoxGeometry& geometry() const noexcept { return geometry_; }
    std::span<const double> weights() const noexcept { return weights_; }

private:
    BoxGeometry geometry_;
    std::vector<double> weights_;
};

/// (sqrt p | -Delta^D sqrt p): half the sum over ordered interior neighbour
/// pairs of (sqrt p(x) - sqrt p(y))^2 plus p(x) per exterior neighbour.
double dirichlet_form(const OccupationMeasure& p);

/// gamma sin^2(pi/(2l)): upper edge of bin l >= 2 and lower edge of bin l - 1.
double classification_edge(std::int64_t l, double gamma);

/// Bin of a Dirichlet-form value: 1 for (gamma sin^2(pi/4), 2d], otherwise the
/// unique l >= 2 with value in (gamma sin^2(pi/(2(l+1))), gamma sin^2(pi/(2l))].
/// Returns nullopt for the value 0, which no bin contains.
std::optional<std::int64_t> classify_form(double form, double gamma, int dim);

std::optional<std::int64_t> classify_measure(const OccupationMeasure& p, double gamma);

struct FaberKrahnResult {
    bool holds = false;
    double ground_energy = 0.0;  ///< E1 of the Dirichlet Laplacian on U
    double bound = 0.0;          ///< c_FK |U|^{-2/d}
    double margin = 0.0;         ///< ground_energy - bound
};

/// Checks E1(-Delta_U^D) >= c_FK |U|^{-2/d} for a finite set of distinct points.
FaberKrahnResult faber_krahn_check(std::span<const Point> subset, double c_fk);

/// Ground energy of the Dirichlet Laplacian on an arbitrary finite point set.
double subset_ground_energy(std::span<const Point> subset);

}  // namespace anderson::lattice
