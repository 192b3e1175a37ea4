#include "qmaxwell/functionals.hpp"

#include "qmaxwell/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qmaxwell {

namespace {

double entropy_trace(const Vector& eigenvalues, double eta) {
  double sum = 0.0;
  for (double s : eigenvalues) sum += regularized_entropy(s, eta);
  return sum;
}

void require_same_basis(const SpectralBasis& a, const SpectralBasis& b, const char* what) {
  if (!(a == b)) throw DimensionMismatch(fmt::format("{}: operands use different bases", what));
}

Vector descending(Vector v) {
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

}  // namespace

FunctionalValue free_energy(const DensityOperator& rho) {
  FunctionalValue v;
  v.entropy_term = entropy_trace(psd_decompose(rho.matrix()).eigenvalues, 0.0);
  v.energy_term = energy_trace(rho);
  v.total = v.entropy_term + v.energy_term;
  return v;
}

FunctionalValue penalized_free_energy(const DensityOperator& rho, const DensityProfile& n,
                                      double epsilon, double eta) {
  if (!(epsilon > 0.0)) throw InvalidArgument(fmt::format("epsilon must be > 0, got {}", epsilon));
  if (!(eta >= 0.0)) throw InvalidArgument(fmt::format("eta must be >= 0, got {}", eta));
  require_same_basis(rho.basis(), n.basis(), "penalized free energy");
  FunctionalValue v;
  v.entropy_term = entropy_trace(psd_decompose(rho.matrix()).eigenvalues, eta);
  v.energy_term = energy_trace(rho);
  const Vector mismatch = density_of(rho) - n.values();
  v.penalty_term = rho.basis().inner(mismatch, mismatch) / (2.0 * epsilon);
  v.total = v.entropy_term + v.energy_term + v.penalty_term;
  return v;
}

double dual_functional(const ChemicalPotential& potential, const DensityProfile& n) {
  const SpectralBasis& basis = n.basis();
  const auto dec = symmetric_eigendecompose(assemble_hamiltonian_plus_potential(basis, potential));
  const double partition = dec.eigenvalues.unaryExpr([](double l) { return std::exp(-l); }).sum();
  return -partition - basis.inner(potential.grid_values(), n.values());
}

Vector dual_gradient(const ChemicalPotential& potential, const DensityProfile& n) {
  return density_of(gibbs_from_potential(n.basis(), potential)) - n.values();
}

Matrix exp_divided_differences(const Vector& eigenvalues) {
  const auto d = eigenvalues.size();
  Matrix phi(d, d);
  for (Eigen::Index p = 0; p < d; ++p) {
    for (Eigen::Index q = 0; q < d; ++q) {
      const double lp = eigenvalues(p);
      const double lq = eigenvalues(q);
      if (std::abs(lp - lq) > 1e-8 * (1.0 + std::abs(lp))) {
        phi(p, q) = (std::exp(-lp) - std::exp(-lq)) / (lq - lp);
      } else {
        phi(p, q) = std::exp(-0.5 * (lp + lq));
      }
    }
  }
  return phi;
}

Vector dual_hessian_apply(const ChemicalPotential& potential, const ChemicalPotential& delta) {
  const SpectralBasis& basis = potential.basis();
  require_same_basis(basis, delta.basis(), "hessian apply");
  const auto dec = symmetric_eigendecompose(assemble_hamiltonian_plus_potential(basis, potential));
  const Matrix& v = dec.eigenvectors;
  const Matrix e = v.transpose() * multiplication_matrix(basis, delta.grid_values()) * v;
  const Matrix response = -v * exp_divided_differences(dec.eigenvalues).cwiseProduct(e) * v.transpose();
  return density_of_matrix(basis, 0.5 * (response + response.transpose()));
}

Matrix linear_response_matrix(const SpectralBasis& basis, const SpectralDecomposition& k_decomposition,
                              int max_wavenumber) {
  const int count = coefficient_count(max_wavenumber);
  if (max_wavenumber < 0 || max_wavenumber > 2 * basis.modes()) {
    throw DimensionMismatch(fmt::format("response requested up to wavenumber {} with M = {}",
                                        max_wavenumber, basis.modes()));
  }
  const Matrix& v = k_decomposition.eigenvectors;
  const Matrix phi = exp_divided_differences(k_decomposition.eigenvalues);
  std::vector<Matrix> rotated;
  rotated.reserve(static_cast<std::size_t>(count));
  for (int r = 0; r < count; ++r) {
    rotated.push_back(v.transpose() * multiplication_matrix_of_mode(basis, r) * v);
  }
  Matrix response(count, count);
  for (int r = 0; r < count; ++r) {
    const Matrix weighted = phi.cwiseProduct(rotated[static_cast<std::size_t>(r)]);
    for (int s = 0; s <= r; ++s) {
      const double value = -weighted.cwiseProduct(rotated[static_cast<std::size_t>(s)]).sum();
      response(r, s) = value;
      response(s, r) = value;
    }
  }
  return response;
}

double gateaux_entropy_derivative(const DensityOperator& rho, const Matrix& omega, double eta) {
  if (!(eta > 0.0)) {
    throw InvalidArgument(
        fmt::format("entropy is not differentiable at eta = {}; use eta > 0", eta));
  }
  if (omega.rows() != rho.matrix().rows() || omega.cols() != rho.matrix().cols()) {
    throw DimensionMismatch("direction and operator dimensions differ");
  }
  if ((omega - omega.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * (1.0 + omega.cwiseAbs().maxCoeff())) {
    throw InvalidOperator("direction must be symmetric");
  }
  const Matrix log_shifted =
      psd_decompose(rho.matrix()).apply([eta](double s) { return std::log(s + eta); });
  return log_shifted.cwiseProduct(omega).sum();
}

// ---------------------------------------------------------------------------

InequalityReport validate_lieb(const DensityOperator& rho) {
  const Vector occupations = descending(psd_decompose(rho.matrix()).eigenvalues);
  Vector levels = rho.basis().h_eigenvalues();
  std::sort(levels.begin(), levels.end());
  InequalityReport r;
  r.name = "lieb";
  r.lhs = occupations.dot(levels);
  r.rhs = energy_trace(rho);
  r.gap = r.rhs - r.lhs;
  r.holds = r.lhs <= r.rhs + 1e-10 * (1.0 + r.rhs);
  r.strict = r.gap > 1e-12 * (1.0 + r.rhs);
  return r;
}

InequalityReport validate_peierls(const DensityOperator& rho, const Matrix& rotation) {
  const auto d = rho.matrix().rows();
  if (rotation.rows() != d || rotation.cols() != d) {
    throw DimensionMismatch("rotation dimension does not match the operator");
  }
  if ((rotation.transpose() * rotation - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-10) {
    throw InvalidArgument("basis rotation is not orthogonal");
  }
  const Vector diagonal = (rotation.transpose() * rho.matrix() * rotation).diagonal();
  InequalityReport r;
  r.name = "peierls";
  r.lhs = entropy_trace(diagonal, 0.0);
  r.rhs = entropy_trace(psd_decompose(rho.matrix()).eigenvalues, 0.0);
  r.gap = r.rhs - r.lhs;
  r.holds = r.lhs <= r.rhs + 1e-10 * (1.0 + std::abs(r.rhs));
  r.strict = r.gap > 1e-12;
  return r;
}

std::optional<double> entropy_lower_bound_ratio(const DensityOperator& rho) {
  const double energy = energy_trace(rho);
  if (!(energy > 1e-12)) return std::nullopt;
  const double entropy = entropy_trace(psd_decompose(rho.matrix()).eigenvalues, 0.0);
  return std::max(0.0, -entropy) / std::sqrt(energy);
}

InequalityReport log_sobolev_gap(const DensityOperator& rho) {
  const Vector eig = psd_decompose(rho.matrix()).eigenvalues;
  double s_log_s = 0.0;
  for (double s : eig) {
    if (s > kZeroEigenvalue) s_log_s += s * std::log(s);
  }
  const SpectralBasis& basis = rho.basis();
  const Vector n = density_of(rho).cwiseMax(kZeroEigenvalue);
  const Vector n_log_n = n.array() * n.array().log();

  InequalityReport r;
  r.name = "log_sobolev";
  r.lhs = s_log_s + energy_trace(rho);
  r.rhs = basis.integrate(n_log_n) + 0.5 * std::log(4.0 * std::numbers::pi) * rho.trace();
  r.gap = r.lhs - r.rhs;
  r.holds = r.gap >= -1e-10 * (1.0 + std::abs(r.rhs));
  r.strict = r.gap > 1e-12;
  r.diagnostic = true;
  return r;
}

InequalityReport convexity_probe(const DensityOperator& rho1, const DensityOperator& rho2,
                                 double t) {
  require_same_basis(rho1.basis(), rho2.basis(), "convexity probe");
  if (!(t > 0.0 && t < 1.0)) throw InvalidArgument(fmt::format("t = {} not in (0, 1)", t));
  const Matrix mix = t * rho1.matrix() + (1.0 - t) * rho2.matrix();
  InequalityReport r;
  r.name = "convexity";
  r.lhs = entropy_trace(psd_decompose(mix).eigenvalues, 0.0);
  r.rhs = t * entropy_trace(psd_decompose(rho1.matrix()).eigenvalues, 0.0) +
          (1.0 - t) * entropy_trace(psd_decompose(rho2.matrix()).eigenvalues, 0.0);
  r.gap = r.rhs - r.lhs;
  r.holds = r.lhs <= r.rhs + 1e-10;
  r.strict = (rho1.matrix() - rho2.matrix()).norm() > 1e-8 && r.gap > 1e-12;
  return r;
}

InequalityReport eigenvalue_perturbation_check(const DensityOperator& rho1,
                                               const DensityOperator& rho2) {
  require_same_basis(rho1.basis(), rho2.basis(), "eigenvalue perturbation");
  const Vector a = descending(symmetric_eigendecompose(rho1.matrix()).eigenvalues);
  const Vector b = descending(symmetric_eigendecompose(rho2.matrix()).eigenvalues);
  InequalityReport r;
  r.name = "eigenvalue_perturbation";
  r.lhs = (a - b).cwiseAbs().maxCoeff();
  r.rhs = trace_norm(rho1.matrix() - rho2.matrix());
  r.gap = r.rhs - r.lhs;
  r.holds = r.lhs <= r.rhs + 1e-10;
  r.strict = r.gap > 1e-12;
  return r;
}

std::optional<double> eigenvalue_decay_ratio(const DensityOperator& rho) {
  const double energy = energy_trace(rho);
  if (!(energy > 1e-12)) return std::nullopt;
  const Vector eig = descending(psd_decompose(rho.matrix()).eigenvalues);
  double sum = 0.0;
  for (Eigen::Index i = 1; i < eig.size(); ++i) {
    const double p = static_cast<double>(i + 1);
    sum += p * p * eig(i);
  }
  return sum / energy;
}

}  // namespace qmaxwell
