#include "qmaxwell/error.hpp"
#include "qmaxwell/spectral_core.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace qmaxwell {

namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kSignificantCoordinate = 1e-8;

void require_symmetric(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw InvalidOperator(fmt::format("{}: matrix is {}x{}, not square", what, m.rows(), m.cols()));
  }
  const double scale = 1.0 + (m.size() ? m.cwiseAbs().maxCoeff() : 0.0);
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= kSymmetryTolerance * scale)) {
    throw InvalidOperator(fmt::format("{}: asymmetry {:.3e} exceeds tolerance", what, asym));
  }
}

int first_significant(const Eigen::Ref<const Vector>& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > kSignificantCoordinate) return static_cast<int>(i);
  }
  return static_cast<int>(v.size());
}

// Replaces an orthonormal basis of a degenerate eigenspace by the one
// obtained from Gram-Schmidt on the projected coordinate vectors, taken in
// index order. Depends only on the subspace, not on the solver's rotation.
Matrix canonical_subspace_basis(const Matrix& cluster) {
  const auto dim = cluster.rows();
  const auto m = cluster.cols();
  Matrix result(dim, m);
  Eigen::Index found = 0;
  for (Eigen::Index i = 0; i < dim && found < m; ++i) {
    Vector v = cluster * cluster.row(i).transpose();
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index j = 0; j < found; ++j) v -= result.col(j).dot(v) * result.col(j);
    }
    const double norm = v.norm();
    if (norm > 1e-3) result.col(found++) = v / norm;
  }
  if (found < m) return cluster;
  return result;
}

}  // namespace

// ---------------------------------------------------------------------------
// Domain types

DensityOperator::DensityOperator(SpectralBasis basis, Matrix matrix)
    : basis_(std::move(basis)), matrix_(std::move(matrix)) {
  if (matrix_.rows() != basis_.dimension() || matrix_.cols() != basis_.dimension()) {
    throw DimensionMismatch(fmt::format("operator is {}x{}, basis dimension is {}",
                                        matrix_.rows(), matrix_.cols(), basis_.dimension()));
  }
  require_symmetric(matrix_, "density operator");
  const Vector eig = Eigen::SelfAdjointEigenSolver<Matrix>(matrix_, Eigen::EigenvaluesOnly)
                         .eigenvalues();
  if (eig(0) < -psd_tolerance(matrix_.trace())) {
    throw InvalidOperator(
        fmt::format("density operator has negative eigenvalue {:.6e}", eig(0)));
  }
}

DensityOperator DensityOperator::trusted(SpectralBasis basis, Matrix matrix) {
  return DensityOperator(std::move(basis), std::move(matrix), Trusted{});
}

DensityProfile::DensityProfile(SpectralBasis basis, Vector values)
    : basis_(std::move(basis)), values_(std::move(values)), min_value_(0.0) {
  if (values_.size() != basis_.grid_size()) {
    throw DimensionMismatch(fmt::format("density has {} values, grid has {}", values_.size(),
                                        basis_.grid_size()));
  }
  if (!values_.allFinite()) throw NonPositiveDensity("density contains non-finite values");
  Eigen::Index where = 0;
  min_value_ = values_.minCoeff(&where);
  if (!(min_value_ > 0.0)) {
    throw NonPositiveDensity(fmt::format("density must be strictly positive; n({}) = {}",
                                         basis_.grid()(where), min_value_));
  }
}

ChemicalPotential::ChemicalPotential(SpectralBasis basis, Vector coefficients)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)) {
  const auto count = coefficients_.size();
  if (count % 2 == 0 || count > coefficient_count(2 * basis_.modes())) {
    throw DimensionMismatch(fmt::format(
        "potential with {} coefficients is incompatible with a basis of M = {}", count,
        basis_.modes()));
  }
  if (!coefficients_.allFinite()) throw InvalidArgument("potential has non-finite coefficients");
}

ChemicalPotential ChemicalPotential::zero(const SpectralBasis& basis) {
  return ChemicalPotential(basis, Vector::Zero(basis.dimension()));
}

ChemicalPotential ChemicalPotential::constant(const SpectralBasis& basis, double value) {
  Vector c = Vector::Zero(basis.dimension());
  c(0) = value;
  return ChemicalPotential(basis, std::move(c));
}

ChemicalPotential ChemicalPotential::from_grid(const SpectralBasis& basis, const Vector& values,
                                               std::optional<int> max_wavenumber) {
  return ChemicalPotential(basis, basis.project(values, max_wavenumber.value_or(basis.modes())));
}

double ChemicalPotential::value_at(double x) const {
  double value = coefficients_(0);
  for (int k = 1; k <= max_wavenumber(); ++k) {
    const double phase = 2.0 * std::numbers::pi * k * x;
    value += std::numbers::sqrt2 *
             (coefficients_(2 * k - 1) * std::cos(phase) + coefficients_(2 * k) * std::sin(phase));
  }
  return value;
}

Vector ChemicalPotential::coefficients_to(int max_wavenumber) const {
  Vector out = Vector::Zero(coefficient_count(max_wavenumber));
  const auto n = std::min(out.size(), coefficients_.size());
  out.head(n) = coefficients_.head(n);
  return out;
}

// ---------------------------------------------------------------------------
// Spectral decomposition

Matrix SpectralDecomposition::reconstruct() const {
  return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

Matrix SpectralDecomposition::apply(const std::function<double(double)>& f) const {
  const Vector mapped = eigenvalues.unaryExpr(f);
  Matrix out = eigenvectors * mapped.asDiagonal() * eigenvectors.transpose();
  return 0.5 * (out + out.transpose());
}

SpectralDecomposition symmetric_eigendecompose(const Matrix& matrix) {
  require_symmetric(matrix, "eigendecomposition");
  const Matrix sym = 0.5 * (matrix + matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw InvalidOperator("symmetric eigensolver failed to converge");
  }
  SpectralDecomposition out{solver.eigenvalues(), solver.eigenvectors()};
  const auto dim = out.eigenvalues.size();

  // Canonicalize each cluster of equal eigenvalues.
  Eigen::Index begin = 0;
  while (begin < dim) {
    Eigen::Index end = begin + 1;
    while (end < dim && std::abs(out.eigenvalues(end) - out.eigenvalues(begin)) <=
                            1e-12 * (1.0 + std::abs(out.eigenvalues(begin)))) {
      ++end;
    }
    if (end - begin > 1) {
      const Matrix cluster = out.eigenvectors.middleCols(begin, end - begin);
      out.eigenvectors.middleCols(begin, end - begin) = canonical_subspace_basis(cluster);
    }
    for (Eigen::Index c = begin; c < end; ++c) {
      auto col = out.eigenvectors.col(c);
      const int lead = first_significant(col);
      if (lead < dim && col(lead) < 0.0) col = -col;
    }
    if (end - begin > 1) {
      std::vector<Eigen::Index> order(static_cast<std::size_t>(end - begin));
      std::iota(order.begin(), order.end(), begin);
      std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return first_significant(out.eigenvectors.col(a)) <
               first_significant(out.eigenvectors.col(b));
      });
      const Matrix cluster = out.eigenvectors.middleCols(begin, end - begin);
      for (std::size_t i = 0; i < order.size(); ++i) {
        out.eigenvectors.col(begin + static_cast<Eigen::Index>(i)) = cluster.col(order[i] - begin);
      }
    }
    begin = end;
  }
  return out;
}

SpectralDecomposition psd_decompose(const Matrix& rho) {
  SpectralDecomposition dec = symmetric_eigendecompose(rho);
  const double tol = psd_tolerance(rho.trace());
  if (dec.eigenvalues.size() > 0 && dec.eigenvalues(0) < -tol) {
    throw InvalidOperator(fmt::format("operator has eigenvalue {:.6e} below the PSD tolerance {:.1e}",
                                      dec.eigenvalues(0), tol));
  }
  dec.eigenvalues = dec.eigenvalues.cwiseMax(0.0);
  return dec;
}

// ---------------------------------------------------------------------------
// Hamiltonian, Gibbs states, densities

Matrix multiplication_matrix(const SpectralBasis& basis, const Vector& values) {
  if (values.size() != basis.grid_size()) {
    throw DimensionMismatch("multiplier length does not match the grid");
  }
  const auto s = basis.samples();
  Matrix g = basis.weight() * (s.transpose() * values.asDiagonal() * s);
  return 0.5 * (g + g.transpose());
}

Matrix multiplication_matrix_of_mode(const SpectralBasis& basis, int r) {
  if (r < 0 || r >= basis.extended_samples().cols()) {
    throw DimensionMismatch(fmt::format("mode {} outside the multiplier range", r));
  }
  return multiplication_matrix(basis, basis.extended_samples().col(r));
}

Matrix assemble_hamiltonian_plus_potential(const SpectralBasis& basis,
                                           const ChemicalPotential& potential) {
  if (!(potential.basis() == basis)) {
    throw DimensionMismatch("potential and basis use different discretizations");
  }
  Matrix k = multiplication_matrix(basis, potential.grid_values());
  k.diagonal() += basis.h_eigenvalues();
  return k;
}

DensityOperator gibbs_from_decomposition(const SpectralBasis& basis,
                                         const SpectralDecomposition& decomposition) {
  return DensityOperator::trusted(basis,
                                  decomposition.apply([](double l) { return std::exp(-l); }));
}

DensityOperator gibbs_from_potential(const SpectralBasis& basis,
                                     const ChemicalPotential& potential) {
  return gibbs_from_decomposition(
      basis, symmetric_eigendecompose(assemble_hamiltonian_plus_potential(basis, potential)));
}

Vector density_of_matrix(const SpectralBasis& basis, const Matrix& matrix) {
  if (matrix.rows() != basis.dimension() || matrix.cols() != basis.dimension()) {
    throw DimensionMismatch("operator dimension does not match the basis");
  }
  const auto s = basis.samples();
  return ((s * matrix).array() * s.array()).rowwise().sum().matrix();
}

Vector density_of(const DensityOperator& rho) {
  return density_of_matrix(rho.basis(), rho.matrix());
}

double kernel_eval(const DensityOperator& rho, double x, double y) {
  if (x < 0.0 || x >= 1.0 || y < 0.0 || y >= 1.0) {
    throw InvalidArgument(fmt::format("kernel arguments ({}, {}) outside [0, 1)", x, y));
  }
  return rho.basis().evaluate(x).dot(rho.matrix() * rho.basis().evaluate(y));
}

double energy_trace(const DensityOperator& rho) {
  return rho.basis().h_eigenvalues().dot(rho.matrix().diagonal());
}

// ---------------------------------------------------------------------------
// Norms

double trace_norm(const Matrix& op) {
  require_symmetric(op, "trace norm");
  return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (op + op.transpose()), Eigen::EigenvaluesOnly)
      .eigenvalues()
      .cwiseAbs()
      .sum();
}

double hs_norm(const Matrix& op) { return op.norm(); }

namespace {

double sobolev_weight(int k, int s) {
  const double w = 1.0 + 4.0 * std::numbers::pi * std::numbers::pi * k * k;
  return s == 0 ? 1.0 : (s > 0 ? w : 1.0 / w);
}

void require_sobolev_index(int s) {
  if (s < -1 || s > 1) throw InvalidArgument(fmt::format("Sobolev index {} not in {{-1, 0, 1}}", s));
}

}  // namespace

double sobolev_norm_coefficients(const Vector& coefficients, int s) {
  require_sobolev_index(s);
  double sum = 0.0;
  for (Eigen::Index p = 0; p < coefficients.size(); ++p) {
    sum += sobolev_weight(wavenumber_of(static_cast<int>(p)), s) * coefficients(p) * coefficients(p);
  }
  return std::sqrt(sum);
}

double sobolev_norm(const SpectralBasis& basis, const Vector& values, int s) {
  require_sobolev_index(s);
  const Vector c = basis.project(values, basis.max_resolved_wavenumber());
  double sum = std::pow(sobolev_norm_coefficients(c, s), 2);
  const int n = basis.grid_size();
  if (n % 2 == 0) {
    double nyquist = 0.0;
    for (int j = 0; j < n; ++j) nyquist += (j % 2 == 0 ? 1.0 : -1.0) * values(j);
    nyquist /= n;
    sum += sobolev_weight(n / 2, s) * nyquist * nyquist;
  }
  return std::sqrt(sum);
}

double tail_norm(const SpectralBasis& basis, const Vector& values, int max_wavenumber) {
  if (max_wavenumber >= basis.max_resolved_wavenumber() && basis.grid_size() % 2 == 1) return 0.0;
  const int k = std::min(max_wavenumber, basis.max_resolved_wavenumber());
  const Matrix t = basis.trig_samples(k);
  const Vector residual = values - t * (basis.weight() * (t.transpose() * values));
  return std::sqrt(basis.inner(residual, residual));
}

// ---------------------------------------------------------------------------
// Entropy

double regularized_entropy(double s, double eta) {
  if (s <= 0.0) return 0.0;
  if (eta <= 0.0) return s > kZeroEigenvalue ? s * std::log(s) - s : 0.0;
  return (s + eta) * std::log(s + eta) - s - eta * std::log(eta);
}

Matrix matrix_entropy_function(const DensityOperator& rho, double eta) {
  if (!(eta >= 0.0)) throw InvalidArgument(fmt::format("eta must be >= 0, got {}", eta));
  return psd_decompose(rho.matrix()).apply([eta](double s) { return regularized_entropy(s, eta); });
}

}  // namespace qmaxwell
