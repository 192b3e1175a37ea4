#pragma once

// Truncated Fourier discretization of the periodic unit interval, the free
// Hamiltonian -d^2/dx^2, and the density-operator algebra built on it.
//
// Basis ordering: e_0 = 1, e_{2k-1} = sqrt(2) cos(2 pi k x),
// e_{2k} = sqrt(2) sin(2 pi k x), k = 1..M. Operators are real symmetric
// D x D matrices (D = 2M+1) of coefficients (e_p, rho e_q).

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <memory>
#include <optional>

namespace qmaxwell {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Grid size needed to integrate A e_p e_q exactly when A carries
/// wavenumbers up to M.
constexpr int minimum_grid_size(int modes) { return 4 * modes + 1; }

/// Wavenumber carried by coefficient index p.
constexpr int wavenumber_of(int p) { return (p + 1) / 2; }

/// Number of coefficients for trigonometric polynomials of degree K.
constexpr int coefficient_count(int max_wavenumber) { return 2 * max_wavenumber + 1; }

/// Immutable discretization shared by every object built on it. Copies are
/// cheap and refer to the same tables.
class SpectralBasis {
 public:
  int modes() const { return impl_->modes; }
  int dimension() const { return 2 * impl_->modes + 1; }
  int grid_size() const { return impl_->grid_size; }
  double weight() const { return 1.0 / impl_->grid_size; }

  const Vector& grid() const { return impl_->grid; }
  const Vector& h_eigenvalues() const { return impl_->h_eigenvalues; }

  /// Samples e_p(x_j), N rows by D columns.
  Eigen::Ref<const Matrix> samples() const {
    return impl_->samples.leftCols(dimension());
  }

  /// Samples of trigonometric functions up to wavenumber 2M, the range that
  /// products e_p e_q occupy.
  const Matrix& extended_samples() const { return impl_->samples; }

  /// Trigonometric samples up to wavenumber K (K <= (N-1)/2).
  Matrix trig_samples(int max_wavenumber) const;

  /// Values of e_0..e_{D-1} at an arbitrary point.
  Vector evaluate(double x) const;
  /// Derivatives of e_0..e_{D-1} at an arbitrary point.
  Vector evaluate_derivative(double x) const;

  /// Quadrature integral of a grid function over [0, 1).
  double integrate(const Vector& values) const;
  /// Discrete L2 inner product.
  double inner(const Vector& u, const Vector& v) const;

  /// Coefficients against e_0..e_{2K}, computed by quadrature.
  Vector project(const Vector& values, int max_wavenumber) const;
  /// Grid values of a coefficient vector of odd length 2K+1, K <= 2M.
  Vector synthesize(const Vector& coefficients) const;

  /// Largest wavenumber resolved on the grid without aliasing onto itself.
  int max_resolved_wavenumber() const { return (impl_->grid_size - 1) / 2; }

  friend bool operator==(const SpectralBasis& a, const SpectralBasis& b) {
    return a.modes() == b.modes() && a.grid_size() == b.grid_size();
  }

 private:
  friend SpectralBasis build_basis(int modes, std::optional<int> grid_size);

  struct Impl {
    int modes;
    int grid_size;
    Vector grid;
    Vector h_eigenvalues;
    Matrix samples;
  };

  explicit SpectralBasis(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

  std::shared_ptr<const Impl> impl_;
};

/// Builds the basis for mode cutoff M. Without an explicit grid size the
/// smallest power of two >= 4M+2 is used. Throws InvalidArgument for M < 1
/// or N < 4M+1.
SpectralBasis build_basis(int modes, std::optional<int> grid_size = std::nullopt);

/// Real symmetric positive semidefinite operator in basis coordinates.
class DensityOperator {
 public:
  /// Validates symmetry and positive semidefiniteness; throws
  /// InvalidOperator or DimensionMismatch.
  DensityOperator(SpectralBasis basis, Matrix matrix);

  /// Skips validation. For operators that are PSD by construction.
  static DensityOperator trusted(SpectralBasis basis, Matrix matrix);

  const SpectralBasis& basis() const { return basis_; }
  const Matrix& matrix() const { return matrix_; }
  double trace() const { return matrix_.trace(); }

 private:
  struct Trusted {};
  DensityOperator(SpectralBasis basis, Matrix matrix, Trusted)
      : basis_(std::move(basis)), matrix_(std::move(matrix)) {}

  SpectralBasis basis_;
  Matrix matrix_;
};

/// Strictly positive grid function: the constraint datum.
class DensityProfile {
 public:
  /// Throws NonPositiveDensity if any value is <= 0 or not finite and
  /// DimensionMismatch on a wrong length.
  DensityProfile(SpectralBasis basis, Vector values);

  const SpectralBasis& basis() const { return basis_; }
  const Vector& values() const { return values_; }
  double min_value() const { return min_value_; }
  double mass() const { return basis_.integrate(values_); }

 private:
  SpectralBasis basis_;
  Vector values_;
  double min_value_;
};

/// Real periodic potential stored as Fourier coefficients in basis order.
/// The coefficient vector has odd length 2K+1 with K <= 2M; K = M is the
/// standard representation.
class ChemicalPotential {
 public:
  ChemicalPotential(SpectralBasis basis, Vector coefficients);

  static ChemicalPotential zero(const SpectralBasis& basis);
  static ChemicalPotential constant(const SpectralBasis& basis, double value);
  /// Projects a grid function onto wavenumbers <= K (default M).
  static ChemicalPotential from_grid(const SpectralBasis& basis, const Vector& values,
                                     std::optional<int> max_wavenumber = std::nullopt);

  const SpectralBasis& basis() const { return basis_; }
  const Vector& coefficients() const { return coefficients_; }
  int max_wavenumber() const { return static_cast<int>(coefficients_.size() - 1) / 2; }

  Vector grid_values() const { return basis_.synthesize(coefficients_); }
  double value_at(double x) const;

  /// Coefficients zero-padded or truncated to wavenumber K.
  Vector coefficients_to(int max_wavenumber) const;

 private:
  SpectralBasis basis_;
  Vector coefficients_;
};

struct SpectralDecomposition {
  Vector eigenvalues;   // ascending
  Matrix eigenvectors;  // columns, orthonormal

  Matrix reconstruct() const;
  /// V diag(f(lambda)) V^T.
  Matrix apply(const std::function<double(double)>& f) const;
};

/// Ascending eigenvalues with deterministic eigenvector conventions: each
/// column's first significant coordinate is positive, and columns with equal
/// eigenvalues are ordered by the index of that coordinate. Throws
/// InvalidOperator on non-symmetric input.
SpectralDecomposition symmetric_eigendecompose(const Matrix& matrix);

/// Galerkin matrix of multiplication by a grid function,
/// G_pq = sum_j w g(x_j) e_p(x_j) e_q(x_j).
Matrix multiplication_matrix(const SpectralBasis& basis, const Vector& values);

/// Galerkin matrix of multiplication by trigonometric function r.
Matrix multiplication_matrix_of_mode(const SpectralBasis& basis, int r);

/// K_pq = mu_p delta_pq + int A e_p e_q.
Matrix assemble_hamiltonian_plus_potential(const SpectralBasis& basis,
                                           const ChemicalPotential& potential);

/// exp(-(H + A)) computed from the spectral decomposition of K.
DensityOperator gibbs_from_potential(const SpectralBasis& basis,
                                     const ChemicalPotential& potential);
/// Same, reusing a decomposition of K.
DensityOperator gibbs_from_decomposition(const SpectralBasis& basis,
                                         const SpectralDecomposition& decomposition);

/// Local density n[rho](x_j) = sum_pq rho_pq e_p(x_j) e_q(x_j).
Vector density_of(const DensityOperator& rho);
/// Same for an arbitrary symmetric coefficient matrix.
Vector density_of_matrix(const SpectralBasis& basis, const Matrix& matrix);

/// Integral kernel rho(x, y) for x, y in [0, 1).
double kernel_eval(const DensityOperator& rho, double x, double y);

/// Tr(sqrt(H) rho sqrt(H)) = sum_p mu_p rho_pp.
double energy_trace(const DensityOperator& rho);

/// Sum of absolute eigenvalues.
double trace_norm(const Matrix& op);
/// Frobenius norm.
double hs_norm(const Matrix& op);

/// Fourier multiplier norm with weight (1 + 4 pi^2 k^2)^s, s in {-1, 0, 1}.
double sobolev_norm_coefficients(const Vector& coefficients, int s);
/// Same for a grid function, using every wavenumber the grid resolves.
double sobolev_norm(const SpectralBasis& basis, const Vector& values, int s);

/// L2 norm of the part of a grid function above wavenumber K.
double tail_norm(const SpectralBasis& basis, const Vector& values, int max_wavenumber);

/// beta_eta(s) = (s+eta) log(s+eta) - s - eta log eta, beta_eta(0) = 0.
double regularized_entropy(double s, double eta);

/// beta_eta applied spectrally. Eigenvalues within the PSD tolerance of 0
/// are clamped to 0; throws InvalidOperator below it.
Matrix matrix_entropy_function(const DensityOperator& rho, double eta);

/// Eigenvalues below this are treated as exact zeros by logarithmic maps.
inline constexpr double kZeroEigenvalue = 1e-300;

/// Tolerance of the PSD check for a matrix with the given trace.
inline double psd_tolerance(double trace) { return 1e-10 * (std::abs(trace) + 1.0); }

/// Eigenvalues of rho, clamped to be nonnegative after the PSD check.
SpectralDecomposition psd_decompose(const Matrix& rho);

}  // namespace qmaxwell
