#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qmaxwell/error.hpp"
#include "qmaxwell/random_operators.hpp"
#include "qmaxwell/solver.hpp"
#include "qmaxwell/verify.hpp"
#include "test_support.hpp"

#include <cmath>
#include <functional>

using namespace qmaxwell;
using namespace qmaxwell::testing;

namespace {

DensityProfile sampled(const SpectralBasis& basis, const std::function<double(double)>& f) {
  Vector n(basis.grid_size());
  for (int j = 0; j < basis.grid_size(); ++j) n(j) = f(basis.grid()(j));
  return DensityProfile(basis, n);
}

ChemicalPotential round_trip_potential(const SpectralBasis& basis) {
  Vector c = Vector::Zero(basis.dimension());
  c(1) = 1.0 / std::sqrt(2.0);
  c(4) = 0.3 / std::sqrt(2.0);
  return ChemicalPotential(basis, c);
}

DensityProfile forward(const ChemicalPotential& a) {
  return DensityProfile(a.basis(), density_of(gibbs_from_potential(a.basis(), a)));
}

double max_abs_difference(const ChemicalPotential& a, const ChemicalPotential& b) {
  double worst = 0.0;
  for (int j = 0; j < 1000; ++j) {
    const double x = j / 1000.0;
    worst = std::max(worst, std::abs(a.value_at(x) - b.value_at(x)));
  }
  return worst;
}

void check_success_invariants(const MaxwellianSolution& s, const SolverOptions& opts) {
  const SolveReport& r = s.report;
  CHECK(r.residual_l2 <= opts.tol_l2);
  CHECK(r.duality_gap >= -1e-8);
  CHECK(r.duality_gap <= 1e-6 * (1 + std::abs(r.free_energy)));
  CHECK(r.el_residual <= 10 * opts.tol_l2 * (1 + s.rho.trace()));
  CHECK(r.duality_gap == doctest::Approx(r.free_energy - r.dual_value).epsilon(1e-12));
}

}  // namespace

TEST_CASE("constant density has a constant potential") {
  const auto basis = build_basis(4);
  const DensityProfile n(basis, Vector::Constant(basis.grid_size(), 2.0));
  const SolverOptions opts;
  const auto s = solve_maxwellian(n, opts);
  const double expected = std::log(partition_zero(4) / 2.0);
  CHECK(std::abs(s.potential.coefficients()(0) - expected) <= 1e-10);
  CHECK(std::abs(s.potential.coefficients()(0) + std::log(2.0)) <= 1e-10);
  CHECK(s.potential.coefficients().tail(8).cwiseAbs().maxCoeff() <= 1e-12);
  check_success_invariants(s, opts);
}

TEST_CASE("round trip through the forward map") {
  const auto basis = build_basis(8);
  const auto a_star = round_trip_potential(basis);
  const SolverOptions opts;
  const auto s = solve_maxwellian(forward(a_star), opts);
  CHECK(max_abs_difference(s.potential, a_star) <= 1e-6);
  CHECK(s.report.iterations <= 30);
  check_success_invariants(s, opts);
  // Accepted steps never decrease the dual objective.
  for (std::size_t i = 1; i < s.report.history.size(); ++i) {
    CHECK(s.report.history[i].objective >= s.report.history[i - 1].objective - 1e-14);
  }
}

TEST_CASE("random round trips") {
  const auto basis = build_basis(8);
  Rng rng(1234);
  const SolverOptions opts;
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = random_potential(basis, rng, 4, 2.0);
    const auto s = solve_maxwellian(forward(a), opts);
    CHECK(max_abs_difference(s.potential, a) <= 1e-6);
    check_success_invariants(s, opts);
  }
}

TEST_CASE("alternative methods agree with newton") {
  const auto basis = build_basis(8);
  const auto a_star = round_trip_potential(basis);
  const auto n = forward(a_star);
  for (auto method : {SolverMethod::kDualGradientAscent, SolverMethod::kPenalizedPath}) {
    SolverOptions opts;
    opts.method = method;
    const auto s = solve_maxwellian(n, opts);
    CHECK(s.report.residual_l2 <= opts.tol_l2);
    CHECK(max_abs_difference(s.potential, a_star) <= 1e-5);
  }
}

TEST_CASE("positivity and representability errors") {
  const auto basis = build_basis(8);
  CHECK_THROWS_AS(sampled(basis, [](double x) { return std::cos(2 * kPi * x); }),
                  NonPositiveDensity);

  const auto small = build_basis(2);
  const auto n = sampled(small, [](double x) { return 1 + 0.5 * std::cos(6 * kPi * x); });
  try {
    solve_maxwellian(n);
    FAIL("expected BasisTooSmall");
  } catch (const BasisTooSmall& e) {
    CHECK(e.suggested_modes() > 2);
  }

  SolverOptions opts;
  opts.max_iter = 1;
  const auto rt = forward(round_trip_potential(basis));
  try {
    solve_maxwellian(rt, opts);
    FAIL("expected MaxIterExceeded");
  } catch (const MaxIterExceeded& e) {
    CHECK(e.report().iterations == 1);
    CHECK(e.report().residual_l2 > opts.tol_l2);
  }
}

TEST_CASE("smooth density converges with enough modes") {
  const auto basis = build_basis(16);
  const auto n = sampled(basis, [](double x) { return 1 + 0.5 * std::cos(2 * kPi * x); });
  const SolverOptions opts;
  const auto s = solve_maxwellian(n, opts);
  check_success_invariants(s, opts);
}

TEST_CASE("solver options validation") {
  SolverOptions opts;
  CHECK_NOTHROW(opts.validate());
  opts.tol_l2 = 0.0;
  CHECK_THROWS_AS(opts.validate(), InvalidArgument);
  opts = {};
  opts.epsilon_schedule = {1.0, 1.0};
  CHECK_THROWS_AS(opts.validate(), InvalidArgument);
  opts.epsilon_schedule = {};
  CHECK_THROWS_AS(opts.validate(), InvalidArgument);
  opts.epsilon_schedule = {1.0, -1.0};
  CHECK_THROWS_AS(opts.validate(), InvalidArgument);

  CHECK(parse_solver_method("gradient") == SolverMethod::kDualGradientAscent);
  CHECK(parse_solver_method("penalized_path") == SolverMethod::kPenalizedPath);
  CHECK(parse_solver_method(to_string(SolverMethod::kDualNewton)) == SolverMethod::kDualNewton);
  CHECK_THROWS_AS(parse_solver_method("bfgs"), InvalidArgument);
}

TEST_CASE("penalized problem") {
  const auto basis = build_basis(8);
  const auto n = forward(round_trip_potential(basis));
  const SolverOptions opts;

  const auto loose = solve_penalized(n, 1e6, 0.0, opts);
  const auto free_state = gibbs_from_potential(basis, ChemicalPotential::zero(basis));
  CHECK((loose.rho.matrix() - free_state.matrix()).cwiseAbs().maxCoeff() <= 1e-5);

  const auto reference = solve_maxwellian(n, opts);
  const double f_star = free_energy(reference.rho).total;
  double previous_residual = INFINITY;
  double previous_value = -INFINITY;
  std::optional<ChemicalPotential> warm;
  for (double eps : opts.epsilon_schedule) {
    const auto p = solve_penalized(n, eps, 0.0, opts, warm);
    warm = p.potential;
    CHECK(p.fixed_point_residual <= opts.tol_l2);
    const double f = free_energy(p.rho).total;
    const double f_eps = p.penalized_value.total;
    CHECK(f_eps - f >= -1e-9);
    CHECK(f_star - f_eps >= -1e-9);
    CHECK(p.report.residual_l2 < previous_residual);
    // Relaxing the penalty can only lower the optimum, so F_eps(rho_eps)
    // grows as eps shrinks.
    CHECK(f_eps >= previous_value - 1e-9);
    previous_residual = p.report.residual_l2;
    previous_value = f_eps;
  }

  CHECK_THROWS_AS(solve_penalized(n, 0.0, 0.0, opts), InvalidArgument);
}

TEST_CASE("epsilon sweep") {
  const auto basis = build_basis(4);
  const DensityProfile flat(basis, Vector::Constant(basis.grid_size(), 2.0));
  SolverOptions opts;
  opts.epsilon_schedule = {1.0, 1e-1, 1e-2, 1e-3};
  const auto rows = epsilon_sweep(flat, opts);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].epsilon < rows[i - 1].epsilon);
    CHECK(rows[i].potential_distance_hminus1 < rows[i - 1].potential_distance_hminus1);
  }
  // A_eps is constant: its H^-1 distance is the gap between constants.
  const auto pen = solve_penalized(flat, 1e-2, 0.0, opts);
  CHECK(pen.potential.coefficients().tail(pen.potential.coefficients().size() - 1).cwiseAbs().maxCoeff() <
        1e-10);
  CHECK(rows[2].potential_distance_hminus1 ==
        doctest::Approx(std::abs(pen.potential.coefficients()(0) + std::log(2.0))).epsilon(1e-6));

  opts.epsilon_schedule = {0.5};
  CHECK(epsilon_sweep(flat, opts).size() == 1);

  const auto b8 = build_basis(8);
  const auto rt = forward(round_trip_potential(b8));
  const auto full = epsilon_sweep(rt, SolverOptions{});
  for (std::size_t i = 1; i < full.size(); ++i) {
    CHECK(full[i].potential_distance_hminus1 <= 1.1 * full[i - 1].potential_distance_hminus1);
  }
}

TEST_CASE("euler-lagrange residual") {
  const auto basis = build_basis(4);
  const auto free_state = gibbs_from_potential(basis, ChemicalPotential::zero(basis));
  CHECK(euler_lagrange_residual(free_state, ChemicalPotential::zero(basis)) <= 1e-10);
  CHECK(euler_lagrange_residual(free_state, ChemicalPotential::constant(basis, 1.0)) ==
        doctest::Approx(hs_norm(free_state.matrix())).epsilon(1e-10));
  CHECK(hs_norm(free_state.matrix()) == doctest::Approx(1.0).epsilon(1e-12));

  const DensityOperator zero(basis, Matrix::Zero(9, 9));
  CHECK_THROWS_AS(euler_lagrange_residual(zero, ChemicalPotential::zero(basis)), SingularDensity);

  Rng rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const auto a = random_potential(basis, rng, 4, 1.0);
    const auto rho = gibbs_from_potential(basis, a);
    const double k_norm = assemble_hamiltonian_plus_potential(basis, a).norm();
    CHECK(euler_lagrange_residual(rho, a) <= 1e-10 * (1 + k_norm * rho.trace()));
  }
}

TEST_CASE("potential reconstruction form") {
  const auto basis = build_basis(6);
  const auto free_state = gibbs_from_potential(basis, ChemicalPotential::zero(basis));
  const DensityProfile n0(basis, density_of(free_state));
  for (int p = 0; p < basis.dimension(); ++p) {
    CHECK(std::abs(reconstruct_potential_form(free_state, n0, basis.samples().col(p))) <= 1e-8);
  }

  const auto a = round_trip_potential(build_basis(8));
  const auto n = forward(a);
  const auto s = solve_maxwellian(n);
  const double norm = std::sqrt(n.basis().inner(s.potential.grid_values(), s.potential.grid_values()));
  CHECK(potential_form_mismatch(s, n) <= 1e-6 * (1 + norm));

  Rng rng(3);
  std::normal_distribution<double> g;
  Vector psi1(n.basis().grid_size()), psi2(n.basis().grid_size());
  for (auto& v : psi1) v = g(rng);
  for (auto& v : psi2) v = g(rng);
  const double lhs = reconstruct_potential_form(s.rho, n, psi1 + 2 * psi2);
  const double rhs = reconstruct_potential_form(s.rho, n, psi1) + 2 * reconstruct_potential_form(s.rho, n, psi2);
  CHECK(std::abs(lhs - rhs) <= 1e-12 * (1 + std::abs(lhs)));
}

TEST_CASE("fourier decay diagnostic") {
  const auto basis = build_basis(4);
  const auto flat = fourier_decay_diagnostic(ChemicalPotential::constant(basis, 0.4));
  REQUIRE(flat.size() == 5);
  CHECK(flat[0].magnitude == doctest::Approx(0.4));
  for (std::size_t k = 1; k < flat.size(); ++k) CHECK(flat[k].magnitude == 0.0);

  Vector c = Vector::Zero(9);
  c(1) = 1.0 / std::sqrt(2.0);
  const auto spike = fourier_decay_diagnostic(ChemicalPotential(basis, c));
  CHECK(spike[1].wavenumber == 1);
  CHECK(spike[1].magnitude == doctest::Approx(1 / std::sqrt(2.0)));
  CHECK(spike[0].magnitude == 0.0);

  const auto b16 = build_basis(16);
  const auto s = solve_maxwellian(sampled(b16, [](double x) { return 1 + 0.2 * std::cos(2 * kPi * x); }));
  const auto decay = fourier_decay_diagnostic(s.potential);
  int first_small = -1;
  for (const auto& m : decay) {
    if (m.magnitude < 1e-10) {
      first_small = m.wavenumber;
      break;
    }
  }
  CHECK(first_small > 0);
  CHECK(first_small < 16);
}

TEST_CASE("solves are deterministic") {
  const auto basis = build_basis(8);
  const auto n = forward(round_trip_potential(basis));
  const auto a = solve_maxwellian(n);
  const auto b = solve_maxwellian(n);
  CHECK(a.report == b.report);
  CHECK(a.potential.coefficients() == b.potential.coefficients());
}
