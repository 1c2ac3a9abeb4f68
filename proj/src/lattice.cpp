#include "anderson/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "anderson/error.hpp"

namespace anderson::lattice {

BoxGeometry::BoxGeometry(int dim, std::int64_t side) : dim_(dim), side_(side), size_(1) {
    if (dim < 1) throw DomainError("BoxGeometry: dimension must be >= 1");
    if (side < 1) throw DomainError("BoxGeometry: sites per axis must be >= 1");
    strides_.resize(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j) {
        strides_[static_cast<std::size_t>(j)] = size_;
        if (size_ > (std::size_t{1} << 40) / static_cast<std::size_t>(side))
            throw DomainError("BoxGeometry: site count overflows");
        size_ *= static_cast<std::size_t>(side);
    }
}

bool BoxGeometry::contains(std::span<const std::int64_t> point) const noexcept {
    if (point.size() != static_cast<std::size_t>(dim_)) return false;
    return std::all_of(point.begin(), point.end(), [&](std::int64_t c) { return c >= 0 && c < side_; });
}

std::size_t BoxGeometry::index(std::span<const std::int64_t> point) const {
    if (!contains(point)) throw DomainError("BoxGeometry::index: point outside box");
    std::size_t site = 0;
    for (int j = 0; j < dim_; ++j)
        site += static_cast<std::size_t>(point[static_cast<std::size_t>(j)]) * strides_[static_cast<std::size_t>(j)];
    return site;
}

Point BoxGeometry::point(std::size_t site) const {
    if (site >= size_) throw DomainError("BoxGeometry::point: site index out of range");
    Point x(static_cast<std::size_t>(dim_));
    for (int j = 0; j < dim_; ++j) {
        x[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(site % static_cast<std::size_t>(side_));
        site /= static_cast<std::size_t>(side_);
    }
    return x;
}

std::size_t BoxGeometry::center() const {
    return index(Point(static_cast<std::size_t>(dim_), side_ / 2));
}

int BoxGeometry::interior_degree(std::size_t site) const noexcept {
    int degree = 0;
    for_each_neighbor(site, [&](std::size_t) { ++degree; });
    return degree;
}

HamiltonianOperator::HamiltonianOperator(BoxGeometry geometry)
    : geometry_(std::move(geometry)),
      diagonal_(geometry_.size(), 2.0 * geometry_.dim()) {}

HamiltonianOperator::HamiltonianOperator(BoxGeometry geometry, PotentialSample potential)
    : geometry_(std::move(geometry)), potential_(std::move(potential)) {
    if (potential_.values.size() != geometry_.size())
        throw DomainError("build_hamiltonian: potential has " + std::to_string(potential_.values.size()) +
                          " sites, geometry has " + std::to_string(geometry_.size()));
    diagonal_.resize(geometry_.size());
    for (std::size_t x = 0; x < diagonal_.size(); ++x) {
        const double v = potential_.values[x];
        if (!std::isfinite(v)) throw DomainError("build_hamiltonian: non-finite potential value");
        diagonal_[x] = 2.0 * geometry_.dim() + v;
    }
}

void HamiltonianOperator::apply(std::span<const double> in, std::span<double> out) const {
    const std::size_t n = size();
    if (in.size() != n || out.size() != n) throw DomainError("HamiltonianOperator::apply: size mismatch");
    for (std::size_t x = 0; x < n; ++x) {
        double acc = diagonal_[x] * in[x];
        geometry_.for_each_neighbor(x, [&](std::size_t y) { acc -= in[y]; });
        out[x] = acc;
    }
}

Eigen::VectorXd HamiltonianOperator::apply(const Eigen::VectorXd& in) const {
    Eigen::VectorXd out(in.size());
    apply(std::span<const double>(in.data(), static_cast<std::size_t>(in.size())),
          std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
    return out;
}

Eigen::MatrixXd HamiltonianOperator::dense() const {
    const auto n = static_cast<Eigen::Index>(size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index x = 0; x < n; ++x) {
        m(x, x) = diagonal_[static_cast<std::size_t>(x)];
        geometry_.for_each_neighbor(static_cast<std::size_t>(x),
                                    [&](std::size_t y) { m(x, static_cast<Eigen::Index>(y)) = -1.0; });
    }
    return m;
}

double HamiltonianOperator::trace() const noexcept {
    return std::accumulate(diagonal_.begin(), diagonal_.end(), 0.0);
}

double HamiltonianOperator::spectral_upper_bound() const noexcept {
    return *std::max_element(diagonal_.begin(), diagonal_.end()) + 2.0 * geometry_.dim();
}

double HamiltonianOperator::spectral_lower_bound() const noexcept {
    return *std::min_element(diagonal_.begin(), diagonal_.end()) - 2.0 * geometry_.dim();
}

HamiltonianOperator build_hamiltonian(const BoxGeometry& geometry) { return HamiltonianOperator(geometry); }

HamiltonianOperator build_hamiltonian(const BoxGeometry& geometry, const PotentialSample& potential) {
    return HamiltonianOperator(geometry, potential);
}

double laplacian_ground_energy(int dim, std::int64_t side) {
    if (dim < 1 || side < 1) throw DomainError("laplacian_ground_energy: need d >= 1 and n >= 1");
    const double s = std::sin(std::numbers::pi / (2.0 * static_cast<double>(side + 1)));
    return 4.0 * dim * s * s;
}

std::vector<double> laplacian_ground_state(int dim, std::int64_t side) {
    const BoxGeometry box(dim, side);
    const double n1 = static_cast<double>(side + 1);
    std::vector<double> mode(static_cast<std::size_t>(side));
    for (std::int64_t x = 0; x < side; ++x)
        mode[static_cast<std::size_t>(x)] =
            std::sqrt(2.0 / n1) * std::sin(static_cast<double>(x + 1) * std::numbers::pi / n1);
    std::vector<double> phi(box.size(), 1.0);
    for (std::size_t site = 0; site < box.size(); ++site) {
        std::size_t rest = site;
        for (int j = 0; j < dim; ++j) {
            phi[site] *= mode[rest % static_cast<std::size_t>(side)];
            rest /= static_cast<std::size_t>(side);
        }
    }
    return phi;
}

OccupationMeasure::OccupationMeasure(BoxGeometry geometry, std::vector<double> weights)
    : geometry_(std::move(geometry)), weights_(std::move(weights)) {
    if (weights_.size() != geometry_.size()) throw DomainError("OccupationMeasure: weight count != site count");
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("OccupationMeasure: weights must be finite and >= 0");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("OccupationMeasure: weights must sum to 1");
}

OccupationMeasure OccupationMeasure::from_amplitude(BoxGeometry geometry, std::span<const double> amplitude) {
    std::vector<double> w(amplitude.size());
    double total = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        w[i] = amplitude[i] * amplitude[i];
        total += w[i];
    }
    if (!(total > 0.0)) throw DomainError("OccupationMeasure::from_amplitude: zero amplitude");
    for (double& x : w) x /= total;
    return OccupationMeasure(std::move(geometry), std::move(w));
}

OccupationMeasure OccupationMeasure::point_mass(BoxGeometry geometry, std::size_t site) {
    std::vector<double> w(geometry.size(), 0.0);
    w.at(site) = 1.0;
    return OccupationMeasure(std::move(geometry), std::move(w));
}

OccupationMeasure OccupationMeasure::uniform(BoxGeometry geometry) {
    std::vector<double> w(geometry.size(), 1.0 / static_cast<double>(geometry.size()));
    return OccupationMeasure(std::move(geometry), std::move(w));
}

double dirichlet_form(const OccupationMeasure& p) {
    const auto& box = p.geometry();
    const auto w = p.weights();
    double interior = 0.0;
    double boundary = 0.0;
    for (std::size_t x = 0; x < box.size(); ++x) {
        const double rx = std::sqrt(w[x]);
        box.for_each_neighbor(x, [&](std::size_t y) {
            if (y > x) {
                const double diff = rx - std::sqrt(w[y]);
                interior += diff * diff;
            }
        });
        boundary += box.exterior_degree(x) * w[x];
    }
    return interior + boundary;
}

double classification_edge(std::int64_t l, double gamma) {
    if (l == 2) return 0.5 * gamma;
    const double s = std::sin(std::numbers::pi / (2.0 * static_cast<double>(l)));
    return gamma * s * s;
}

std::optional<std::int64_t> classify_form(double form, double gamma, int dim) {
    if (!(gamma > 0.0)) throw DomainError("classify_form: gamma must be > 0");
    if (form > 2.0 * dim * (1.0 + 1e-12)) throw DomainError("classify_form: form value exceeds 2d");
    if (!(form > 0.0)) return std::nullopt;
    if (form > classification_edge(2, gamma)) return 1;

    const double x = std::asin(std::sqrt(form / gamma));
    const double guess = std::numbers::pi / (2.0 * x);
    if (!(guess < 4e18)) throw DomainError("classify_form: form value below representable bin range");
    auto l = std::max<std::int64_t>(2, static_cast<std::int64_t>(std::floor(guess)));
    // Settle round-off in the inversion against the exact edge expressions.
    while (l > 2 && form > classification_edge(l, gamma)) --l;
    while (form <= classification_edge(l + 1, gamma)) ++l;
    return l;
}

std::optional<std::int64_t> classify_measure(const OccupationMeasure& p, double gamma) {
    return classify_form(dirichlet_form(p), gamma, p.geometry().dim());
}

namespace {

Eigen::MatrixXd subset_laplacian(std::span<const Point> subset) {
    if (subset.empty()) throw DomainError("faber_krahn_check: subset must be nonempty");
    const std::size_t dim = subset.front().size();
    if (dim == 0) throw DomainError("faber_krahn_check: points must have dimension >= 1");
    if (subset.size() > kDefaultDenseCap) throw CapExceeded("faber_krahn_check: subset above dense cap");
    std::map<Point, Eigen::Index> lookup;
    for (std::size_t i = 0; i < subset.size(); ++i) {
        if (subset[i].size() != dim) throw DomainError("faber_krahn_check: mixed point dimensions");
        if (!lookup.emplace(subset[i], static_cast<Eigen::Index>(i)).second)
            throw DomainError("faber_krahn_check: duplicate point");
    }
    const auto n = static_cast<Eigen::Index>(subset.size());
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        m(i, i) = 2.0 * static_cast<double>(dim);
        Point y = subset[static_cast<std::size_t>(i)];
        for (std::size_t j = 0; j < dim; ++j) {
            for (int step : {-1, 1}) {
                y[j] += step;
                if (auto it = lookup.find(y); it != lookup.end()) m(i, it->second) = -1.0;
                y[j] -= step;
            }
        }
    }
    return m;
}

}  // namespace

double subset_ground_energy(std::span<const Point> subset) {
    const Eigen::MatrixXd m = subset_laplacian(subset);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

FaberKrahnResult faber_krahn_check(std::span<const Point> subset, double c_fk) {
    FaberKrahnResult r;
    r.ground_energy = subset_ground_energy(subset);
    const double dim = static_cast<double>(subset.front().size());
    r.bound = c_fk * std::pow(static_cast<double>(subset.size()), -2.0 / dim);
    r.margin = r.ground_energy - r.bound;
    // Single-site sets sit exactly on the bound when c_FK = 2d.
    r.holds = r.margin >= -1e-12 * std::max(1.0, r.bound);
    return r;
}

}  // namespace anderson::lattice
