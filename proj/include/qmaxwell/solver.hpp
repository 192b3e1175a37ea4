#pragma once

// Inverse problem: given a positive density n, find the potential A such
// that exp(-(H+A)) has local density n. The default route is damped Newton
// on the concave dual J(A); the penalized route follows the minimizers of
// F + (1/2 eps) ||n[rho] - n||^2 as eps decreases.

#include "qmaxwell/error.hpp"
#include "qmaxwell/functionals.hpp"
#include "qmaxwell/spectral_core.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qmaxwell {

enum class SolverMethod { kDualNewton, kDualGradientAscent, kPenalizedPath };

std::string_view to_string(SolverMethod method);
/// Accepts the canonical names and the CLI shorthand "gradient" and
/// "penalized". Throws InvalidArgument otherwise.
SolverMethod parse_solver_method(std::string_view name);

struct SolverOptions {
  SolverMethod method = SolverMethod::kDualNewton;
  double tol_l2 = 1e-9;
  int max_iter = 100;
  std::vector<double> epsilon_schedule = {1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
  double armijo_c = 1e-4;
  double armijo_shrink = 0.5;
  double newton_regularization = 1e-12;
  double eta = 0.0;

  /// Throws InvalidArgument on a non-positive tolerance, an empty or
  /// non-descending schedule, or out-of-range line-search constants.
  void validate() const;
};

struct IterationRecord {
  double residual = 0.0;
  double step = 0.0;
  double objective = 0.0;

  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct SolveReport {
  int iterations = 0;
  double residual_l2 = 0.0;
  double residual_hminus1 = 0.0;
  double free_energy = 0.0;
  double dual_value = 0.0;
  double duality_gap = 0.0;
  double el_residual = 0.0;
  std::vector<IterationRecord> history;

  friend bool operator==(const SolveReport&, const SolveReport&) = default;
};

class MaxIterExceeded : public Error {
 public:
  MaxIterExceeded(const std::string& what, SolveReport report)
      : Error(what), report_(std::move(report)) {}
  const SolveReport& report() const noexcept { return report_; }

 private:
  SolveReport report_;
};

struct MaxwellianSolution {
  ChemicalPotential potential;
  DensityOperator rho;
  SolveReport report;
};

/// Finds A with n[exp(-(H+A))] = n to within opts.tol_l2 in L2.
MaxwellianSolution solve_maxwellian(const DensityProfile& n, const SolverOptions& opts = {});

struct PenalizedSolution {
  DensityOperator rho;
  /// A_eps = (1/eps) (n[rho_eps] - n), carried up to wavenumber 2M.
  ChemicalPotential potential;
  SolveReport report;
  /// ||A_eps - P(1/eps)(n[rho_eps] - n)||_{L2}, P the projection onto
  /// wavenumbers <= 2M.
  double fixed_point_residual = 0.0;
  FunctionalValue penalized_value;
};

/// Minimizer of the penalized free energy at a fixed eps. An optional warm
/// start must be a potential on the same basis.
PenalizedSolution solve_penalized(const DensityProfile& n, double epsilon, double eta,
                                  const SolverOptions& opts = {},
                                  const std::optional<ChemicalPotential>& warm_start = std::nullopt);

struct SweepRow {
  double epsilon = 0.0;
  double residual_l2 = 0.0;
  double penalized_value = 0.0;
  double potential_distance_hminus1 = 0.0;
};

/// Penalized solutions along opts.epsilon_schedule, compared with the
/// constrained solution.
std::vector<SweepRow> epsilon_sweep(const DensityProfile& n, const SolverOptions& opts = {});

/// ||sqrt(rho) (log rho + H + A) sqrt(rho)||_{J2}. Eigenvalues of rho below
/// kZeroEigenvalue contribute nothing. Throws SingularDensity when rho has
/// no eigenvalue above that threshold.
double euler_lagrange_residual(const DensityOperator& rho, const ChemicalPotential& potential);

/// Linear form recovering (A, psi) from rho and n:
/// -Tr((psi/n) rho log rho) - sum_p (sqrt(H) sqrt(rho) phi_p, sqrt(H) (psi/n) sqrt(rho) phi_p).
double reconstruct_potential_form(const DensityOperator& rho, const DensityProfile& n,
                                  const Vector& psi);

struct FourierMagnitude {
  int wavenumber = 0;
  double magnitude = 0.0;
};

/// |coefficient| per wavenumber, combining the cos/sin pair.
std::vector<FourierMagnitude> fourier_decay_diagnostic(const ChemicalPotential& potential);

}  // namespace qmaxwell
