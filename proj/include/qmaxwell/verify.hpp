#pragma once

// Seeded randomized sweeps over the exact operator inequalities, plus the
// consistency checks of a converged solve.

#include "qmaxwell/functionals.hpp"
#include "qmaxwell/random_operators.hpp"
#include "qmaxwell/solver.hpp"

#include <cstdint>
#include <vector>

namespace qmaxwell {

/// Outcome of one inequality over many random instances.
struct SweepSummary {
  /// Instance with the smallest gap.
  InequalityReport worst;
  int instances = 0;
  /// Instances where the inequality fails beyond its slack.
  int violations = 0;
  /// Instances expected to be strict (distinct arguments) whose gap is not
  /// positive. Only the convexity sweep sets this.
  int non_strict = 0;
};

SweepSummary sweep_lieb(const SpectralBasis& basis, int samples, Rng& rng);
SweepSummary sweep_peierls(const SpectralBasis& basis, int samples, Rng& rng);
SweepSummary sweep_convexity(const SpectralBasis& basis, int samples, Rng& rng);
SweepSummary sweep_eigenvalue_perturbation(const SpectralBasis& basis, int samples, Rng& rng);

/// max over the 2M+1 basis functions psi of |form(psi) - int A psi|.
double potential_form_mismatch(const MaxwellianSolution& solution, const DensityProfile& n);

/// Full check list for a converged solve: the four sweeps (worst instance
/// each), the Euler-Lagrange residual, the potential reconstruction and the
/// log-Sobolev diagnostic. The random stream is seeded with `seed`.
std::vector<InequalityReport> run_verification(const MaxwellianSolution& solution,
                                               const DensityProfile& n,
                                               const SolverOptions& opts, int samples,
                                               std::uint64_t seed);

/// True iff every non-diagnostic entry holds.
bool all_hold(const std::vector<InequalityReport>& reports);

}  // namespace qmaxwell
