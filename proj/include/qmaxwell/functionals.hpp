#pragma once

// Free energies, the Lagrangian dual of the density-constrained problem and
// its derivatives, and validators for the exact operator inequalities that
// the existence theory relies on.

#include "qmaxwell/spectral_core.hpp"

#include <optional>
#include <string>

namespace qmaxwell {

struct FunctionalValue {
  double entropy_term = 0.0;  // Tr beta_eta(rho)
  double energy_term = 0.0;   // Tr sqrt(H) rho sqrt(H)
  double penalty_term = 0.0;  // (1/2 eps) ||n[rho] - n||^2
  double total = 0.0;
};

/// F(rho) = Tr(rho log rho - rho) + Tr(sqrt(H) rho sqrt(H)).
FunctionalValue free_energy(const DensityOperator& rho);

/// F_{eps,eta}(rho): beta_eta entropy plus the L2 penalty on the density
/// mismatch. Throws InvalidArgument for eps <= 0 or eta < 0.
FunctionalValue penalized_free_energy(const DensityOperator& rho, const DensityProfile& n,
                                      double epsilon, double eta = 0.0);

/// J(A) = -Tr exp(-(H+A)) - int A n.
double dual_functional(const ChemicalPotential& potential, const DensityProfile& n);

/// n[exp(-(H+A))] - n on the grid.
Vector dual_gradient(const ChemicalPotential& potential, const DensityProfile& n);

/// Directional derivative of A -> n[exp(-(H+A))] along delta, on the grid.
Vector dual_hessian_apply(const ChemicalPotential& potential, const ChemicalPotential& delta);

/// Divided differences of exp(-x) over the eigenvalues, with the midpoint
/// derivative for (near-)degenerate pairs.
Matrix exp_divided_differences(const Vector& eigenvalues);

/// Coefficient-space linear response: R_rs = d <n[rho_A], e_r> / d a_s for
/// potential modes r, s <= 2K. R is symmetric negative semidefinite.
Matrix linear_response_matrix(const SpectralBasis& basis, const SpectralDecomposition& k_decomposition,
                              int max_wavenumber);

/// Tr(log(rho + eta) omega). Throws InvalidArgument for eta <= 0.
double gateaux_entropy_derivative(const DensityOperator& rho, const Matrix& omega, double eta);

// ---------------------------------------------------------------------------
// Inequality validators

struct InequalityReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  /// rhs - lhs for upper bounds, lhs - rhs for lower bounds.
  double gap = 0.0;
  bool holds = false;
  /// Gap strictly positive (beyond 1e-12).
  bool strict = false;
  /// Informational only; never counted as a failure.
  bool diagnostic = false;

  friend bool operator==(const InequalityReport&, const InequalityReport&) = default;
};

/// Rearrangement bound: sum of descending eigenvalues of rho paired with
/// ascending eigenvalues of H never exceeds Tr(sqrt(H) rho sqrt(H)).
InequalityReport validate_lieb(const DensityOperator& rho);

/// sum_i beta((u_i, rho u_i)) <= Tr beta(rho) for the orthonormal columns of
/// the rotation. Throws InvalidArgument if the rotation is not orthogonal.
InequalityReport validate_peierls(const DensityOperator& rho, const Matrix& rotation);

/// max(0, -Tr beta(rho)) / sqrt(energy); nullopt when the energy vanishes.
std::optional<double> entropy_lower_bound_ratio(const DensityOperator& rho);

/// Log-Sobolev comparison with the whole-space constant. Diagnostic: on the
/// torus the constant state violates it.
InequalityReport log_sobolev_gap(const DensityOperator& rho);

/// Tr beta(t rho1 + (1-t) rho2) <= t Tr beta(rho1) + (1-t) Tr beta(rho2).
InequalityReport convexity_probe(const DensityOperator& rho1, const DensityOperator& rho2,
                                 double t);

/// max_p |lambda_p(rho1) - lambda_p(rho2)| <= ||rho1 - rho2||_{J1}.
InequalityReport eigenvalue_perturbation_check(const DensityOperator& rho1,
                                               const DensityOperator& rho2);

/// sum_{p >= 2} p^2 lambda_p / Tr(sqrt(H) rho sqrt(H)) with eigenvalues in
/// descending order, p counted from 1. Informational; nullopt at zero energy.
std::optional<double> eigenvalue_decay_ratio(const DensityOperator& rho);

}  // namespace qmaxwell
