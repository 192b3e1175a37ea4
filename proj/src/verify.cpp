#include "qmaxwell/verify.hpp"

#include <algorithm>
#include <cmath>

namespace qmaxwell {
namespace {

void fold(SweepSummary& summary, const InequalityReport& report) {
  if (summary.instances == 0 || report.gap < summary.worst.gap) summary.worst = report;
  ++summary.instances;
  if (!report.holds) ++summary.violations;
}

}  // namespace

SweepSummary sweep_lieb(const SpectralBasis& basis, int samples, Rng& rng) {
  SweepSummary summary;
  for (int i = 0; i < samples; ++i) fold(summary, validate_lieb(random_density_operator(basis, rng)));
  return summary;
}

SweepSummary sweep_peierls(const SpectralBasis& basis, int samples, Rng& rng) {
  SweepSummary summary;
  for (int i = 0; i < samples; ++i) {
    const DensityOperator rho = random_density_operator(basis, rng);
    fold(summary, validate_peierls(rho, haar_rotation(basis.dimension(), rng)));
  }
  return summary;
}

SweepSummary sweep_convexity(const SpectralBasis& basis, int samples, Rng& rng) {
  SweepSummary summary;
  std::uniform_real_distribution<double> weight(0.05, 0.95);
  for (int i = 0; i < samples; ++i) {
    const DensityOperator a = random_density_operator(basis, rng);
    const DensityOperator b = random_density_operator(basis, rng);
    const InequalityReport r = convexity_probe(a, b, weight(rng));
    fold(summary, r);
    if ((a.matrix() - b.matrix()).norm() > 1e-8 && !r.strict) ++summary.non_strict;
  }
  return summary;
}

SweepSummary sweep_eigenvalue_perturbation(const SpectralBasis& basis, int samples, Rng& rng) {
  SweepSummary summary;
  for (int i = 0; i < samples; ++i) {
    const DensityOperator a = random_density_operator(basis, rng);
    const DensityOperator b = random_density_operator(basis, rng);
    fold(summary, eigenvalue_perturbation_check(a, b));
  }
  return summary;
}

double potential_form_mismatch(const MaxwellianSolution& solution, const DensityProfile& n) {
  const SpectralBasis& basis = n.basis();
  const Vector a = solution.potential.grid_values();
  double worst = 0.0;
  for (int p = 0; p < basis.dimension(); ++p) {
    const Vector psi = basis.samples().col(p);
    const double form = reconstruct_potential_form(solution.rho, n, psi);
    worst = std::max(worst, std::abs(form - basis.inner(a, psi)));
  }
  return worst;
}

std::vector<InequalityReport> run_verification(const MaxwellianSolution& solution,
                                               const DensityProfile& n,
                                               const SolverOptions& opts, int samples,
                                               std::uint64_t seed) {
  const SpectralBasis& basis = n.basis();
  Rng rng(seed);
  std::vector<InequalityReport> out;

  SweepSummary lieb = sweep_lieb(basis, samples, rng);
  fold(lieb, validate_lieb(solution.rho));
  out.push_back(lieb.worst);

  SweepSummary peierls = sweep_peierls(basis, samples, rng);
  fold(peierls, validate_peierls(solution.rho, haar_rotation(basis.dimension(), rng)));
  out.push_back(peierls.worst);

  const SweepSummary convexity = sweep_convexity(basis, samples, rng);
  InequalityReport convex = convexity.worst;
  convex.holds = convexity.violations == 0 && convexity.non_strict == 0;
  out.push_back(convex);

  out.push_back(sweep_eigenvalue_perturbation(basis, samples, rng).worst);

  InequalityReport el;
  el.name = "euler_lagrange";
  el.lhs = euler_lagrange_residual(solution.rho, solution.potential);
  el.rhs = 10.0 * opts.tol_l2 * (1.0 + solution.rho.trace());
  el.gap = el.rhs - el.lhs;
  el.holds = el.lhs <= el.rhs;
  el.strict = el.gap > 0.0;
  out.push_back(el);

  InequalityReport form;
  form.name = "potential_reconstruction";
  form.lhs = potential_form_mismatch(solution, n);
  form.rhs = 1e-6 * (1.0 + std::sqrt(basis.inner(solution.potential.grid_values(),
                                                 solution.potential.grid_values())));
  form.gap = form.rhs - form.lhs;
  form.holds = form.lhs <= form.rhs;
  form.strict = form.gap > 0.0;
  out.push_back(form);

  out.push_back(log_sobolev_gap(solution.rho));
  return out;
}

bool all_hold(const std::vector<InequalityReport>& reports) {
  return std::all_of(reports.begin(), reports.end(),
                     [](const InequalityReport& r) { return r.diagnostic || r.holds; });
}

}  // namespace qmaxwell
