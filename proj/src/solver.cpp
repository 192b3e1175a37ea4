#include "qmaxwell/solver.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace qmaxwell {

std::string_view to_string(SolverMethod method) {
  switch (method) {
    case SolverMethod::kDualNewton:
      return "dual_newton";
    case SolverMethod::kDualGradientAscent:
      return "dual_gradient_ascent";
    case SolverMethod::kPenalizedPath:
      return "penalized_path";
  }
  return "unknown";
}

SolverMethod parse_solver_method(std::string_view name) {
  if (name == "dual_newton" || name == "newton") return SolverMethod::kDualNewton;
  if (name == "dual_gradient_ascent" || name == "gradient") return SolverMethod::kDualGradientAscent;
  if (name == "penalized_path" || name == "penalized") return SolverMethod::kPenalizedPath;
  throw InvalidArgument(fmt::format("unknown solver method '{}'", name));
}

void SolverOptions::validate() const {
  if (!(tol_l2 > 0.0)) throw InvalidArgument("tol_l2 must be > 0");
  if (max_iter < 1) throw InvalidArgument("max_iter must be >= 1");
  if (epsilon_schedule.empty()) throw InvalidArgument("epsilon schedule is empty");
  for (std::size_t i = 0; i < epsilon_schedule.size(); ++i) {
    if (!(epsilon_schedule[i] > 0.0)) throw InvalidArgument("epsilon schedule must be positive");
    if (i > 0 && !(epsilon_schedule[i] < epsilon_schedule[i - 1])) {
      throw InvalidArgument("epsilon schedule must be strictly descending");
    }
  }
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw InvalidArgument("armijo_c must lie in (0, 1)");
  if (!(armijo_shrink > 0.0 && armijo_shrink < 1.0)) {
    throw InvalidArgument("armijo_shrink must lie in (0, 1)");
  }
  if (!(newton_regularization >= 0.0)) throw InvalidArgument("newton_regularization must be >= 0");
  if (!(eta >= 0.0)) throw InvalidArgument("eta must be >= 0");
}

namespace {

constexpr double kConditionLimit = 1e12;
constexpr double kMinStep = 1e-12;
constexpr int kStallWindow = 5;

// Concave objective J_eps(b) = -Tr exp(-(H + A_b)) - int A_b n - (eps/2)|b|^2
// over the coefficients b of A up to wavenumber K. eps = 0 is the plain dual.
struct DualPoint {
  Vector coefficients;
  SpectralDecomposition decomposition;
  Vector density;
  double objective = -std::numeric_limits<double>::infinity();
  Vector gradient;
  double residual_l2 = 0.0;
};

class DualObjective {
 public:
  DualObjective(const DensityProfile& n, int max_wavenumber, double epsilon)
      : n_(n), basis_(n.basis()), max_wavenumber_(max_wavenumber), epsilon_(epsilon) {}

  DualPoint evaluate(const Vector& coefficients) const {
    DualPoint p;
    p.coefficients = coefficients;
    const ChemicalPotential potential(basis_, coefficients);
    p.decomposition =
        symmetric_eigendecompose(assemble_hamiltonian_plus_potential(basis_, potential));
    if (p.decomposition.eigenvalues(0) < -700.0) return p;  // exp overflow
    const Matrix rho = p.decomposition.apply([](double l) { return std::exp(-l); });
    p.density = density_of_matrix(basis_, rho);
    const double partition =
        p.decomposition.eigenvalues.unaryExpr([](double l) { return std::exp(-l); }).sum();
    const Vector mismatch = p.density - n_.values();
    p.objective = -partition - basis_.inner(potential.grid_values(), n_.values()) -
                  0.5 * epsilon_ * coefficients.squaredNorm();
    p.gradient = basis_.project(mismatch, max_wavenumber_) - epsilon_ * coefficients;
    p.residual_l2 = std::sqrt(basis_.inner(mismatch, mismatch));
    return p;
  }

  // Negative Hessian: -R + eps I, positive semidefinite.
  Matrix curvature(const DualPoint& p) const {
    Matrix c = -linear_response_matrix(basis_, p.decomposition, max_wavenumber_);
    c.diagonal().array() += epsilon_;
    return c;
  }

  // Gradient rescaled by the H^1 multiplier and the particle number.
  Vector preconditioned_gradient(const DualPoint& p) const {
    Vector d = p.gradient;
    const double trace =
        std::max(p.decomposition.eigenvalues.unaryExpr([](double l) { return std::exp(-l); }).sum(),
                 1e-300);
    for (Eigen::Index r = 0; r < d.size(); ++r) {
      const double k = wavenumber_of(static_cast<int>(r));
      d(r) *= (1.0 + 4.0 * std::numbers::pi * std::numbers::pi * k * k) / (trace + epsilon_);
    }
    return d;
  }

  const SpectralBasis& basis() const { return basis_; }
  int max_wavenumber() const { return max_wavenumber_; }
  double epsilon() const { return epsilon_; }

 private:
  const DensityProfile& n_;
  SpectralBasis basis_;
  int max_wavenumber_;
  double epsilon_;
};

// Newton direction from the curvature, or nullopt when the system is too
// ill-conditioned even after the diagonal shift.
std::optional<Vector> newton_direction(const Matrix& curvature, const Vector& gradient,
                                       double regularization) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(curvature);
  if (solver.info() != Eigen::Success) return std::nullopt;
  Vector eig = solver.eigenvalues();
  const double largest = eig.cwiseAbs().maxCoeff();
  if (!(largest > 0.0)) return std::nullopt;
  if (eig(0) <= 0.0 || largest / eig(0) > kConditionLimit) {
    eig = eig.cwiseMax(0.0).array() + regularization * largest;
    if (!(eig(0) > 0.0) || largest / eig(0) > kConditionLimit) return std::nullopt;
  }
  const Matrix& v = solver.eigenvectors();
  return v * (v.transpose() * gradient).cwiseQuotient(eig);
}

struct LineSearchResult {
  DualPoint point;
  double step = 0.0;
  bool accepted = false;
};

LineSearchResult armijo_search(const DualObjective& objective, const DualPoint& current,
                               const Vector& direction, double initial_step,
                               const SolverOptions& opts) {
  const double slope = current.gradient.dot(direction);
  LineSearchResult result;
  if (!(slope > 0.0)) return result;
  double t = initial_step;
  while (t >= kMinStep) {
    DualPoint trial = objective.evaluate(current.coefficients + t * direction);
    // Near the optimum the increase drops below the rounding level of J;
    // there a step that keeps J within that level and shrinks the gradient
    // is accepted.
    const double flat = 1e-14 * (1.0 + std::abs(current.objective));
    const bool sufficient = trial.objective >= current.objective + opts.armijo_c * t * slope;
    const bool flat_progress = opts.armijo_c * t * slope < flat &&
                               trial.objective >= current.objective - flat &&
                               trial.gradient.norm() < current.gradient.norm();
    if (std::isfinite(trial.objective) && (sufficient || flat_progress)) {
      result.point = std::move(trial);
      result.step = t;
      result.accepted = true;
      return result;
    }
    t *= opts.armijo_shrink;
  }
  return result;
}

Vector initial_potential(const DensityProfile& n) {
  const SpectralBasis& basis = n.basis();
  const double z0 =
      gibbs_from_potential(basis, ChemicalPotential::zero(basis)).trace();
  const Vector guess = (-n.values().array().log() + std::log(z0)).matrix();
  return basis.project(guess, basis.modes());
}

int suggest_modes(const DensityProfile& n, double tol) {
  const SpectralBasis& basis = n.basis();
  const int m = basis.modes();
  for (int k = m + 1; k <= basis.max_resolved_wavenumber(); ++k) {
    if (tail_norm(basis, n.values(), k) <= tol) return std::max(k, 2 * m);
  }
  return 2 * m;
}

enum class Outcome { kConverged, kStalled, kMaxIter, kLineSearchFailed };

struct AscentResult {
  DualPoint point;
  Outcome outcome = Outcome::kMaxIter;
  int iterations = 0;
  std::vector<IterationRecord> history;
};

// Maximizes the dual objective until measure(point) <= tol. With
// roundoff_stop a Newton step that no longer moves the point ends the run.
template <typename Measure>
AscentResult ascend(const DualObjective& objective, DualPoint start, const SolverOptions& opts,
                    SolverMethod method, Measure measure, double tol, bool fixed_point_damping,
                    bool roundoff_stop) {
  AscentResult result;
  result.point = std::move(start);
  double gradient_step = 1.0;
  std::vector<double> progress;

  for (int it = 0; it < opts.max_iter; ++it) {
    DualPoint& current = result.point;
    const double value = measure(current);
    if (value <= tol) {
      result.outcome = Outcome::kConverged;
      return result;
    }
    progress.push_back(value);
    if (static_cast<int>(progress.size()) > kStallWindow &&
        progress.back() > 0.99 * progress[progress.size() - 1 - kStallWindow]) {
      result.outcome = Outcome::kStalled;
      return result;
    }

    LineSearchResult step;
    bool newton = false;
    if (fixed_point_damping && objective.epsilon() > 0.0 &&
        current.gradient.norm() / objective.epsilon() >= 1e-2) {
      // Damped self-consistency update A <- A + 0.5 (T(A) - A), kept only if
      // it passes the sufficient-increase test.
      SolverOptions single = opts;
      single.armijo_shrink = 1e-3;
      step = armijo_search(objective, current, current.gradient / objective.epsilon(), 0.5,
                           single);
      if (step.accepted && step.step < 0.5) step.accepted = false;
    }
    if (!step.accepted && method != SolverMethod::kDualGradientAscent) {
      if (auto direction = newton_direction(objective.curvature(current), current.gradient,
                                            opts.newton_regularization)) {
        newton = true;
        step = armijo_search(objective, current, *direction, 1.0, opts);
      }
    }
    if (!step.accepted) {
      newton = false;
      const Vector direction = objective.preconditioned_gradient(current);
      step = armijo_search(objective, current, direction, std::min(1.0, 2.0 * gradient_step), opts);
      if (step.accepted) gradient_step = step.step;
    }
    if (!step.accepted) {
      result.outcome = Outcome::kLineSearchFailed;
      return result;
    }

    const double moved = (step.point.coefficients - current.coefficients).norm();
    spdlog::debug("iteration {}: residual {:.3e} -> {:.3e}, step {:.3e}, objective {:.15g}",
                  it, current.residual_l2, step.point.residual_l2, step.step, step.point.objective);
    result.history.push_back({step.point.residual_l2, step.step, step.point.objective});
    result.point = std::move(step.point);
    ++result.iterations;
    if (roundoff_stop && newton && moved <= 1e-14 * (1.0 + result.point.coefficients.norm())) {
      result.outcome = Outcome::kConverged;
      return result;
    }
  }
  result.outcome = measure(result.point) <= tol ? Outcome::kConverged : Outcome::kMaxIter;
  return result;
}

void fill_constrained_report(SolveReport& report, const DensityProfile& n,
                             const ChemicalPotential& potential, const DensityOperator& rho) {
  const Vector mismatch = density_of(rho) - n.values();
  report.residual_l2 = std::sqrt(n.basis().inner(mismatch, mismatch));
  report.residual_hminus1 = sobolev_norm(n.basis(), mismatch, -1);
  report.free_energy = free_energy(rho).total;
  report.dual_value = dual_functional(potential, n);
  report.duality_gap = report.free_energy - report.dual_value;
  report.el_residual = euler_lagrange_residual(rho, potential);
}

[[noreturn]] void fail(const AscentResult& run, const DensityProfile& n, const SolverOptions& opts,
                       SolveReport report) {
  const SpectralBasis& basis = n.basis();
  const Vector mismatch = run.point.density - n.values();
  const double tail = tail_norm(basis, mismatch, basis.modes());
  if ((run.outcome == Outcome::kStalled || run.outcome == Outcome::kLineSearchFailed) &&
      tail > opts.tol_l2) {
    const int suggested = suggest_modes(n, opts.tol_l2);
    throw BasisTooSmall(
        fmt::format("residual stalled at {:.3e} with {:.3e} of it above wavenumber {}; "
                    "the density is not representable at M = {} (try M = {})",
                    run.point.residual_l2, tail, basis.modes(), basis.modes(), suggested),
        suggested);
  }
  const char* reason = run.outcome == Outcome::kMaxIter ? "iteration limit reached"
                       : run.outcome == Outcome::kStalled ? "residual stalled"
                                                          : "line search failed";
  throw MaxIterExceeded(fmt::format("{} after {} iterations; residual {:.3e} > tol {:.1e}", reason,
                                    run.iterations, run.point.residual_l2, opts.tol_l2),
                        std::move(report));
}

MaxwellianSolution solve_by_penalized_path(const DensityProfile& n, const SolverOptions& opts);

}  // namespace

MaxwellianSolution solve_maxwellian(const DensityProfile& n, const SolverOptions& opts) {
  opts.validate();
  if (!(n.min_value() > 0.0)) throw NonPositiveDensity("density must be strictly positive");
  if (!std::isfinite(n.mass())) throw InvalidArgument("density mass is not finite");
  if (opts.method == SolverMethod::kPenalizedPath) return solve_by_penalized_path(n, opts);

  const SpectralBasis& basis = n.basis();
  const DualObjective objective(n, basis.modes(), 0.0);
  const double tol = opts.tol_l2;
  auto run = ascend(
      objective, objective.evaluate(initial_potential(n)), opts, opts.method,
      [](const DualPoint& p) { return p.residual_l2; }, tol, false, false);

  ChemicalPotential potential(basis, run.point.coefficients);
  DensityOperator rho = gibbs_from_decomposition(basis, run.point.decomposition);
  SolveReport report;
  report.iterations = run.iterations;
  report.history = std::move(run.history);
  fill_constrained_report(report, n, potential, rho);
  if (run.outcome != Outcome::kConverged) fail(run, n, opts, std::move(report));
  return {std::move(potential), std::move(rho), std::move(report)};
}

PenalizedSolution solve_penalized(const DensityProfile& n, double epsilon, double eta,
                                  const SolverOptions& opts,
                                  const std::optional<ChemicalPotential>& warm_start) {
  opts.validate();
  if (!(epsilon > 0.0)) throw InvalidArgument(fmt::format("epsilon must be > 0, got {}", epsilon));
  if (!(eta >= 0.0)) throw InvalidArgument(fmt::format("eta must be >= 0, got {}", eta));
  const SpectralBasis& basis = n.basis();
  const int k = 2 * basis.modes();
  Vector start = Vector::Zero(coefficient_count(k));
  if (warm_start) {
    if (!(warm_start->basis() == basis)) {
      throw DimensionMismatch("warm start uses a different basis");
    }
    start = warm_start->coefficients_to(k);
  } else {
    start.head(basis.dimension()) = initial_potential(n);
  }

  const DualObjective objective(n, k, epsilon);
  const double tol = opts.tol_l2;
  auto run = ascend(
      objective, objective.evaluate(start), opts, SolverMethod::kDualNewton,
      [epsilon](const DualPoint& p) { return p.gradient.norm() / epsilon; }, tol, true, true);
  // Below this the dual gradient is rounding noise in n[rho] - n.
  const double noise_floor = 1e-13 * (1.0 + n.values().cwiseAbs().maxCoeff());
  if (run.outcome != Outcome::kMaxIter && run.point.gradient.norm() <= noise_floor) {
    run.outcome = Outcome::kConverged;
  }

  ChemicalPotential potential(basis, run.point.coefficients);
  DensityOperator rho = gibbs_from_decomposition(basis, run.point.decomposition);
  PenalizedSolution out{rho, potential, {}, run.point.gradient.norm() / epsilon,
                        penalized_free_energy(rho, n, epsilon, eta)};
  SolveReport& report = out.report;
  report.iterations = run.iterations;
  report.history = std::move(run.history);
  const Vector mismatch = density_of(rho) - n.values();
  report.residual_l2 = std::sqrt(basis.inner(mismatch, mismatch));
  report.residual_hminus1 = sobolev_norm(basis, mismatch, -1);
  report.free_energy = free_energy(rho).total;
  report.dual_value = run.point.objective;
  report.duality_gap = out.penalized_value.total - report.dual_value;
  report.el_residual = euler_lagrange_residual(rho, potential);
  if (run.outcome != Outcome::kConverged) {
    throw MaxIterExceeded(
        fmt::format("penalized solve at eps = {:.1e} did not converge: fixed-point residual {:.3e}",
                    epsilon, out.fixed_point_residual),
        report);
  }
  return out;
}

namespace {

MaxwellianSolution solve_by_penalized_path(const DensityProfile& n, const SolverOptions& opts) {
  std::vector<double> schedule = opts.epsilon_schedule;
  std::optional<ChemicalPotential> warm;
  std::vector<IterationRecord> history;
  int iterations = 0;
  for (std::size_t i = 0;; ++i) {
    if (i >= schedule.size()) {
      const double next = schedule.back() * 0.1;
      if (next < 1e-14) break;
      schedule.push_back(next);
    }
    const double epsilon = schedule[i];
    auto step = solve_penalized(n, epsilon, opts.eta, opts, warm);
    iterations += step.report.iterations;
    history.insert(history.end(), step.report.history.begin(), step.report.history.end());
    warm = step.potential;
    spdlog::debug("penalized path: eps {:.1e}, residual {:.3e}", epsilon, step.report.residual_l2);
    if (i + 1 >= opts.epsilon_schedule.size() && step.report.residual_l2 <= opts.tol_l2) {
      SolveReport report;
      report.iterations = iterations;
      report.history = std::move(history);
      fill_constrained_report(report, n, step.potential, step.rho);
      return {std::move(step.potential), std::move(step.rho), std::move(report)};
    }
    if (iterations >= opts.max_iter * static_cast<int>(schedule.size())) break;
  }
  SolveReport report;
  report.iterations = iterations;
  report.history = std::move(history);
  const DensityOperator rho = gibbs_from_potential(n.basis(), *warm);
  fill_constrained_report(report, n, *warm, rho);
  throw MaxIterExceeded(
      fmt::format("penalized path ended at residual {:.3e} > tol {:.1e}", report.residual_l2,
                  opts.tol_l2),
      std::move(report));
}

}  // namespace

std::vector<SweepRow> epsilon_sweep(const DensityProfile& n, const SolverOptions& opts) {
  opts.validate();
  SolverOptions reference_opts = opts;
  reference_opts.method = SolverMethod::kDualNewton;
  const auto reference = solve_maxwellian(n, reference_opts);
  const int k = 2 * n.basis().modes();
  const Vector reference_coefficients = reference.potential.coefficients_to(k);

  std::vector<SweepRow> rows;
  std::optional<ChemicalPotential> warm;
  for (double epsilon : opts.epsilon_schedule) {
    auto step = solve_penalized(n, epsilon, opts.eta, opts, warm);
    rows.push_back({epsilon, step.report.residual_l2, step.penalized_value.total,
                    sobolev_norm_coefficients(step.potential.coefficients_to(k) -
                                                  reference_coefficients,
                                              -1)});
    warm = std::move(step.potential);
  }
  return rows;
}

double euler_lagrange_residual(const DensityOperator& rho, const ChemicalPotential& potential) {
  const SpectralBasis& basis = rho.basis();
  const Matrix k = assemble_hamiltonian_plus_potential(basis, potential);
  const auto dec = psd_decompose(rho.matrix());
  const Vector& s = dec.eigenvalues;
  if (!(s.maxCoeff() > kZeroEigenvalue)) {
    throw SingularDensity("density operator has no support; its logarithm is undefined");
  }
  const Matrix& w = dec.eigenvectors;
  Matrix m = w.transpose() * k * w;
  const auto d = s.size();
  for (Eigen::Index i = 0; i < d; ++i) {
    const bool live_i = s(i) > kZeroEigenvalue;
    if (live_i) m(i, i) += std::log(s(i));
    for (Eigen::Index j = 0; j < d; ++j) {
      const bool live_j = s(j) > kZeroEigenvalue;
      m(i, j) = (live_i && live_j) ? std::sqrt(s(i)) * m(i, j) * std::sqrt(s(j)) : 0.0;
    }
  }
  return m.norm();
}

double reconstruct_potential_form(const DensityOperator& rho, const DensityProfile& n,
                                  const Vector& psi) {
  const SpectralBasis& basis = rho.basis();
  if (!(basis == n.basis())) throw DimensionMismatch("operator and density use different bases");
  if (psi.size() != basis.grid_size()) {
    throw DimensionMismatch("test function length does not match the grid");
  }
  const Matrix weight = multiplication_matrix(basis, psi.cwiseQuotient(n.values()));
  const Matrix rho_log_rho = psd_decompose(rho.matrix()).apply(
      [](double s) { return s > kZeroEigenvalue ? s * std::log(s) : 0.0; });
  const double entropy_part = weight.cwiseProduct(rho_log_rho).sum();
  const double kinetic_part =
      basis.h_eigenvalues().dot((weight * rho.matrix()).diagonal());
  return -entropy_part - kinetic_part;
}

std::vector<FourierMagnitude> fourier_decay_diagnostic(const ChemicalPotential& potential) {
  const Vector& c = potential.coefficients();
  std::vector<FourierMagnitude> table;
  table.push_back({0, std::abs(c(0))});
  for (int k = 1; k <= potential.max_wavenumber(); ++k) {
    table.push_back({k, std::hypot(c(2 * k - 1), c(2 * k))});
  }
  return table;
}

}  // namespace qmaxwell
