#include <Eigen/Dense>

#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "lradi/lyap_adi.hpp"
#include "lradi/oracle.hpp"

using namespace lradi;
using testutil::lyap_problem;
using testutil::random_factor;
using testutil::random_matrix;
using testutil::random_stable;
using testutil::random_symmetric;
using testutil::rel_err;
using testutil::sparse_of;
using testutil::speye;

namespace {

AdiOptions abs_opts(double tol, int iters) {
  AdiOptions o;
  o.abstol = tol;
  o.max_iters = iters;
  return o;
}

AdiOptions rel_opts(double tol, int iters) {
  AdiOptions o;
  o.reltol = tol;
  o.max_iters = iters;
  return o;
}

CyclicShiftProvider cyclic(std::vector<Complex> shifts) {
  return CyclicShiftProvider({std::move(shifts), "fixed"});
}

// dense residual F X E^T + E X F^T + G S G^T of a candidate solution
MatrixXd dense_residual(const LyapunovProblem& p, const MatrixXd& X) {
  const MatrixXd F = p.coefficient_dense();
  const MatrixXd E = MatrixXd(p.E);
  return F * X * E.transpose() + E * X * F.transpose() + testutil::rhs_dense(p);
}

LyapunovProblem scalar_problem() {
  return lyap_problem(sparse_of(MatrixXd::Constant(1, 1, -2.0)), speye(1), MatrixXd::Ones(1, 1),
                      MatrixXd::Ones(1, 1));
}

// eigendecomposition of a dense symmetric matrix as a low-rank factor
LowRankFactor factor_of(const MatrixXd& X) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(X);
  LowRankFactor f;
  f.Z = eig.eigenvectors();
  f.Y = MatrixXd(eig.eigenvalues().asDiagonal());
  return f;
}

}  // namespace

TEST_SUITE_BEGIN("lyap_adi");

TEST_CASE("initial residual: empty start reduces to the right-hand side") {
  const Index n = 4;
  LyapunovProblem p = lyap_problem(sparse_of(random_stable(n, 401)), speye(n),
                                   MatrixXd::Identity(n, 1), MatrixXd::Identity(1, 1));
  const LowRankFactor x0 = LowRankFactor::zero(n);
  const MatrixXd R = initial_residual_factor(p, x0);
  const MatrixXd T = initial_residual_inner(p, x0);
  CHECK(R == p.G);
  CHECK(T == p.S);
  CHECK(frobenius_norm<double>(R, T) == doctest::Approx(1.0));
}

TEST_CASE("initial residual: scalar worked example") {
  LyapunovProblem p = scalar_problem();
  LowRankFactor x0;
  x0.Z = MatrixXd::Constant(1, 1, 0.25);
  x0.Y = MatrixXd::Ones(1, 1);
  const MatrixXd R = initial_residual_factor(p, x0);
  const MatrixXd T = initial_residual_inner(p, x0);
  REQUIRE(R.cols() == 3);
  CHECK(R(0, 0) == 1.0);
  CHECK(R(0, 1) == 0.25);   // E Z0
  CHECK(R(0, 2) == -0.5);   // F Z0
  MatrixXd wantT(3, 3);
  wantT << 1, 0, 0, 0, 0, 1, 0, 1, 0;
  CHECK(T == wantT);
  CHECK(frobenius_norm<double>(R, T) == doctest::Approx(0.75));
}

TEST_CASE("initial residual matches dense arithmetic, correction included") {
  const Index n = 20;
  LyapunovProblem p = lyap_problem(sparse_of(random_stable(n, 411)),
                                   sparse_of(MatrixXd::Identity(n, n) + 0.1 * random_symmetric(n, 412)),
                                   random_matrix(n, 2, 413), random_symmetric(2, 414));
  p.U = random_matrix(n, 2, 415);
  p.V = random_matrix(n, 2, 416);
  const LowRankFactor x0 = random_factor(n, 3, 417);

  const MatrixXd R = initial_residual_factor(p, x0);
  const MatrixXd T = initial_residual_inner(p, x0);
  REQUIRE(R.cols() == 2 + 2 * 3);
  const double want = dense_residual(p, x0.materialize()).norm();
  CHECK(frobenius_norm<double>(R, T) == doctest::Approx(want).epsilon(1e-10));

  LowRankFactor bad = random_factor(n + 1, 2, 418);
  CHECK_THROWS_AS(initial_residual_factor(p, bad), structural_error);
}

TEST_CASE("scalar equation solves in one exactly-shifted step") {
  LyapunovProblem p = scalar_problem();
  auto prov = cyclic({Complex(-2.0, 0.0)});
  const AdiResult r = solve_lyapunov(p, prov, abs_opts(1e-14, 5));
  CHECK(r.converged);
  CHECK(r.trace.iterations == 1);
  CHECK(r.X.materialize()(0, 0) == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(r.trace.final_residual <= 1e-14);
  CHECK(r.trace.shifts_used == std::vector<Complex>{Complex(-2.0, 0.0)});
  REQUIRE(r.trace.rows.size() == 2);
  CHECK(r.trace.rows[0].k == 0);
  CHECK(r.trace.rows[0].residual_norm == doctest::Approx(1.0));
  CHECK(r.trace.rows[0].cumulative_solves == 0);
}

TEST_CASE("spectral shifts finish a diagonal problem in two steps") {
  LyapunovProblem p = lyap_problem(sparse_of(MatrixXd(Eigen::Vector2d(-1, -3).asDiagonal())),
                                   speye(2), MatrixXd::Ones(2, 1), MatrixXd::Ones(1, 1));
  auto prov = cyclic({Complex(-1, 0), Complex(-3, 0)});
  const AdiResult r = solve_lyapunov(p, prov, abs_opts(1e-12, 4));
  CHECK(r.converged);
  CHECK(r.trace.iterations == 2);
  MatrixXd want(2, 2);
  want << 0.5, 0.25, 0.25, 1.0 / 6.0;
  CHECK(rel_err(r.X.materialize(), want) <= 1e-11);
}

TEST_CASE("reported residual tracks the true residual at every iteration") {
  LyapunovProblem p = testutil::heat_lyap(50, 1, 2, 21, /*lumped=*/true);
  const LowRankFactor x0 = random_factor(50, 1, 421);
  PenzlShiftProvider prov(8, 10, 10, 5);

  const MatrixXd T0 = initial_residual_inner(p, x0);
  const double rhs_norm = testutil::rhs_dense(p).norm();
  int callbacks = 0;
  const AdiObserver obs = [&](const AdiStepView& v) {
    ++callbacks;
    CHECK(v.residual_inner == T0);  // the inner factor is bitwise constant
    CHECK(v.residual_factor.cols() == p.G.cols() + 2 * x0.cols());
    const double truth = dense_residual(p, v.assemble().materialize()).norm();
    // The recursion does not see the truncation of the accumulated iterate, so
    // the agreement floor is ~ 2 ||A|| * (truncation error), about 1e-9 here.
    CHECK(std::abs(v.residual_norm - truth) <= 5e-9 * std::max(truth, rhs_norm));
  };
  const AdiResult r = solve_lyapunov(p, x0, prov, rel_opts(1e-9, 80), nullptr, obs);
  CHECK(r.converged);
  CHECK(callbacks == static_cast<int>(r.trace.rows.size()));
  CHECK(dense_residual(p, r.X.materialize()).norm() <= 1e-8 * rhs_norm);
}

TEST_CASE("a conjugate pair is consumed by one real paired step") {
  MatrixXd A(2, 2);
  A << -1, 2, -2, -1;  // spectrum -1 +- 2i
  LyapunovProblem p = lyap_problem(sparse_of(A), speye(2), MatrixXd::Identity(2, 1),
                                   MatrixXd::Identity(1, 1));
  auto prov = cyclic({Complex(-1, 2), Complex(-1, -2)});
  const AdiResult r = solve_lyapunov(p, prov, abs_opts(1e-12, 4));
  CHECK(r.converged);
  CHECK(r.trace.iterations == 2);  // one paired step counts as two iterations
  REQUIRE(r.trace.shifts_used.size() == 2);
  CHECK(r.trace.shifts_used[0] == Complex(-1, 2));
  CHECK(r.trace.shifts_used[1] == Complex(-1, -2));
  CHECK(r.X.Z.allFinite());  // and the factors are real by construction

  const MatrixXd want =
      oracle::dense_lyapunov(A, MatrixXd::Identity(2, 2), testutil::rhs_dense(p));
  CHECK(rel_err(r.X.materialize(), want) <= 1e-10);
}

TEST_CASE("paired real step equals two complex steps") {
  MatrixXd A(3, 3);
  A << -1, 2, 0, -2, -1, 1, 0, 0, -4;
  LyapunovProblem p = lyap_problem(sparse_of(A), speye(3), random_matrix(3, 1, 431),
                                   MatrixXd::Identity(1, 1));
  const Complex alpha(-1.0, 2.0);

  auto prov = cyclic({alpha, std::conj(alpha)});
  const AdiResult r = solve_lyapunov(p, prov, abs_opts(1e-30, 2));  // exactly one paired step

  // reference: textbook iteration in complex arithmetic, shift then conjugate
  const MatrixXcd Ac = A.cast<Complex>();
  const MatrixXcd I = MatrixXcd::Identity(3, 3);
  MatrixXcd W = p.G.cast<Complex>();
  MatrixXcd X = MatrixXcd::Zero(3, 3);
  for (const Complex a : {alpha, std::conj(alpha)}) {
    const MatrixXcd V = (Ac + a * I).partialPivLu().solve(W);
    W -= 2.0 * a.real() * V;
    X += -2.0 * a.real() * (V * V.adjoint());
  }
  CHECK(X.imag().norm() <= 1e-12 * X.real().norm());
  CHECK(rel_err(r.X.materialize(), MatrixXd(X.real())) <= 1e-10);
}

TEST_CASE("an exact initial value converges without any step") {
  LyapunovProblem p = lyap_problem(sparse_of(MatrixXd(Eigen::Vector2d(-1, -3).asDiagonal())),
                                   speye(2), MatrixXd::Ones(2, 1), MatrixXd::Ones(1, 1));
  const MatrixXd want = oracle::dense_lyapunov(MatrixXd(p.A), MatrixXd(p.E), testutil::rhs_dense(p));
  const LowRankFactor x0 = factor_of(want);
  auto prov = cyclic({Complex(-1, 0)});
  const AdiResult r = solve_lyapunov(p, x0, prov, rel_opts(1e-10, 10));
  CHECK(r.converged);
  CHECK(r.trace.iterations == 0);
  CHECK(r.trace.rows.size() == 1);
  CHECK(r.trace.shifts_used.empty());
  CHECK(rel_err(r.X.materialize(), want) <= 1e-10);
}

TEST_CASE("starting from X0 equals solving the residual equation from zero") {
  LyapunovProblem p = testutil::heat_lyap(12, 1, 1, 31, /*lumped=*/true);
  const LowRankFactor x0 = random_factor(12, 2, 441);
  ShiftedSolver ops(p);
  const ShiftSequence seq = heuristic_shifts(ops, 4, 6, 6, 77);

  auto prov_a = cyclic(seq.values);
  const AdiResult direct = solve_lyapunov(p, x0, prov_a, abs_opts(1e-30, 6));

  LyapunovProblem residual_eq = p;
  residual_eq.G = initial_residual_factor(p, x0);
  residual_eq.S = initial_residual_inner(p, x0);
  auto prov_b = cyclic(seq.values);
  const AdiResult update = solve_lyapunov(residual_eq, prov_b, abs_opts(1e-30, 6));

  CHECK(direct.trace.shifts_used == update.trace.shifts_used);
  const MatrixXd via_residual = x0.materialize() + update.X.materialize();
  CHECK(rel_err(direct.X.materialize(), via_residual) <= 1e-8);
}

TEST_CASE("diffusion problem converges under the heuristic pool") {
  LyapunovProblem p = testutil::heat_lyap(100, 1, 2, 13);
  PenzlShiftProvider prov(10, 10, 10, 13);
  const AdiResult r = solve_lyapunov(p, prov, rel_opts(1e-10, 100));
  CHECK(r.converged);
  CHECK(r.trace.iterations <= 100);
  CHECK(r.trace.solves > 0);
  CHECK(r.trace.solution_cols <= 2 * r.trace.iterations + 2);
  const double rhs_norm = testutil::rhs_dense(p).norm();
  CHECK(dense_residual(p, r.X.materialize()).norm() <= 1e-9 * rhs_norm);
  CHECK(r.trace.threshold == doctest::Approx(1e-10 * r.trace.rhs_norm));
  CHECK(r.trace.shift_origin == "heur:10,10,10");
}

TEST_CASE("a shared solver is not refactorized by a repeated solve") {
  LyapunovProblem p = testutil::heat_lyap(40, 1, 1, 17);
  ShiftedSolver shared(p);
  const ShiftSequence seq = heuristic_shifts(shared, 6, 8, 8, 3);

  auto prov1 = cyclic(seq.values);
  const AdiResult r1 = solve_lyapunov(p, LowRankFactor::zero(40), prov1, rel_opts(1e-9, 60), &shared);
  CHECK(r1.converged);
  const long f_after_first = shared.factorizations();

  auto prov2 = cyclic(seq.values);
  const AdiResult r2 = solve_lyapunov(p, LowRankFactor::zero(40), prov2, rel_opts(1e-9, 60), &shared);
  CHECK(r2.converged);
  CHECK(shared.factorizations() == f_after_first);  // every shift hit the cache
  CHECK(rel_err(r2.X.materialize(), r1.X.materialize()) <= 1e-12);
}

TEST_CASE("one step rewrites the residual factor as the shifted image of the increment") {
  const Index n = 20;
  LyapunovProblem p = testutil::heat_lyap(20, 1, 2, 23);
  p.U = random_matrix(n, 1, 451);
  p.V = random_matrix(n, 1, 452);
  ShiftedSolver s(p);
  const double a = -7.0;

  const MatrixXd R0 = p.G;
  const MatrixXd V = s.solve(a, R0);
  const MatrixXd R1 = R0 - 2.0 * a * (MatrixXd(p.E) * V);
  const MatrixXd F = p.coefficient_dense();
  const MatrixXd R1_alg = F * V - a * (MatrixXd(p.E) * V);  // (F - a E) V
  CHECK(rel_err(R1, R1_alg) <= 1e-10);
}

TEST_CASE("wide right-hand sides are flagged") {
  LyapunovProblem p = testutil::heat_lyap(10, 1, 1, 3);
  p.G = random_matrix(10, 4, 461);  // 3 g > n
  p.S = MatrixXd::Identity(4, 4);
  auto prov = cyclic({Complex(-1, 0)});
  const AdiResult r = solve_lyapunov(p, prov, rel_opts(1e-2, 3));
  REQUIRE(!r.trace.warnings.empty());

  LyapunovProblem ok = testutil::heat_lyap(10, 1, 1, 3);
  auto prov2 = cyclic({Complex(-1, 0)});
  CHECK(solve_lyapunov(ok, prov2, rel_opts(1e-2, 30)).trace.warnings.empty());
}

TEST_CASE("non-convergence is reported, not thrown") {
  LyapunovProblem p = testutil::heat_lyap(100, 1, 2, 13);
  PenzlShiftProvider prov(10, 10, 10, 13);
  const AdiResult r = solve_lyapunov(p, prov, rel_opts(1e-10, 2));
  CHECK_FALSE(r.converged);
  CHECK(r.trace.iterations == 2);
  CHECK(r.trace.final_residual > r.trace.threshold);
  CHECK(r.trace.rows.size() >= 2);
}

TEST_CASE("option and input validation") {
  LyapunovProblem p = scalar_problem();
  auto prov = cyclic({Complex(-1, 0)});

  AdiOptions both;
  both.abstol = 1e-8;
  both.reltol = 1e-8;
  CHECK_THROWS_AS(solve_lyapunov(p, prov, both), structural_error);
  CHECK_THROWS_AS(solve_lyapunov(p, prov, AdiOptions{}), structural_error);  // neither set
  AdiOptions neg;
  neg.abstol = -1.0;
  CHECK_THROWS_AS(solve_lyapunov(p, prov, neg), structural_error);
  AdiOptions iters = abs_opts(1e-8, -1);
  CHECK_THROWS_AS(solve_lyapunov(p, prov, iters), structural_error);

  CHECK_THROWS_AS(solve_lyapunov(p, random_factor(3, 1, 471), prov, abs_opts(1e-8, 3)),
                  structural_error);

  ShiftedSolver wrong(speye(5), speye(5));
  CHECK_THROWS_AS(
      solve_lyapunov(p, LowRankFactor::zero(1), prov, abs_opts(1e-8, 3), &wrong),
      structural_error);
}

TEST_SUITE_END();
