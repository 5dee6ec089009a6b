#include <Eigen/Dense>

#include <algorithm>
#include <deque>

#include "doctest.h"
#include "helpers.hpp"
#include "lradi/oracle.hpp"
#include "lradi/shifts.hpp"

using namespace lradi;
using testutil::sparse_of;
using testutil::speye;

namespace {

std::vector<Complex> sorted_by_re_im(std::vector<Complex> v) {
  std::sort(v.begin(), v.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return v;
}

// worst single-shift reduction factor of candidate a over the pool
double worst_factor(Complex a, const std::vector<Complex>& pool) {
  double worst = 0.0;
  for (const Complex t : pool)
    worst = std::max(worst, std::abs(t - std::conj(a)) / std::abs(t + a));
  return worst;
}

ShiftedSolver diag_solver(const Eigen::VectorXd& d) {
  return ShiftedSolver(sparse_of(MatrixXd(d.asDiagonal())), speye(d.size()));
}

}  // namespace

TEST_SUITE_BEGIN("shifts");

TEST_CASE("sequence validation") {
  ShiftSequence ok{{Complex(-1, 0), Complex(-2, 3), Complex(-2, -3)}, "test"};
  CHECK_NOTHROW(ok.validate());

  CHECK_THROWS_AS(ShiftSequence({{Complex(1, 0)}, ""}).validate(), structural_error);
  CHECK_THROWS_AS(ShiftSequence({{Complex(0, 0)}, ""}).validate(), structural_error);
  // pair must lead with the +Im member
  CHECK_THROWS_AS(ShiftSequence({{Complex(-2, -3), Complex(-2, 3)}, ""}).validate(),
                  structural_error);
  // conjugate must be adjacent
  CHECK_THROWS_AS(ShiftSequence({{Complex(-2, 3), Complex(-1, 0), Complex(-2, -3)}, ""}).validate(),
                  structural_error);
  // non-real shift without any conjugate at all
  CHECK_THROWS_AS(ShiftSequence({{Complex(-2, 3)}, ""}).validate(), structural_error);
}

TEST_CASE("krylov estimates: dimension one returns the eigenvalue") {
  const auto ritz = arnoldi_ritz([](const VectorXd& x) { return VectorXd(-7.0 * x); }, 1, 1, 42);
  REQUIRE(ritz.size() == 1);
  CHECK(ritz[0].real() == doctest::Approx(-7.0));
  CHECK(ritz[0].imag() == doctest::Approx(0.0));
}

TEST_CASE("krylov estimates: full-dimensional run reproduces the spectrum") {
  const Eigen::Vector3d d(-1.0, -2.0, -3.0);
  const MatrixXd A = d.asDiagonal();
  const auto ritz = sorted_by_re_im(
      arnoldi_ritz([&A](const VectorXd& x) { return VectorXd(A * x); }, 3, 3, 7));
  REQUIRE(ritz.size() == 3);
  CHECK(std::abs(ritz[0] - Complex(-3, 0)) <= 1e-10);
  CHECK(std::abs(ritz[1] - Complex(-2, 0)) <= 1e-10);
  CHECK(std::abs(ritz[2] - Complex(-1, 0)) <= 1e-10);
}

TEST_CASE("krylov estimates: scalar multiples of the identity close after one step") {
  const auto ritz =
      arnoldi_ritz([](const VectorXd& x) { return VectorXd(-4.5 * x); }, 5, 5, 11);
  REQUIRE(ritz.size() == 1);  // the Krylov space closes immediately
  CHECK(ritz[0].real() == doctest::Approx(-4.5));
}

TEST_CASE("krylov estimates stay inside the spectral interval of a diffusion operator") {
  auto p = testutil::heat_lyap(100, 1, 1, 5);
  ShiftedSolver ops(p);
  const auto spec = oracle::generalized_spectrum(MatrixXd(p.A), MatrixXd(p.E));
  double lo = 0, hi = -1e300;
  for (const Complex v : spec) {
    lo = std::min(lo, v.real());
    hi = std::max(hi, v.real());
  }
  const auto ritz = arnoldi_ritz(
      [&](const VectorXd& x) { return ops.solve_E(ops.apply_coefficient(x)); }, ops.n(), 10, 5);
  REQUIRE(ritz.size() == 10);
  for (const Complex v : ritz) {
    CHECK(std::abs(v.imag()) <= 1e-8 * std::abs(lo));
    CHECK(v.real() >= lo - 1e-8 * std::abs(lo));
    CHECK(v.real() <= hi + 1e-8 * std::abs(lo));
    CHECK(v.real() < 0.0);
  }
}

TEST_CASE("krylov estimates: argument validation") {
  const auto apply = [](const VectorXd& x) { return x; };
  CHECK_THROWS_AS(arnoldi_ritz(apply, 0, 1, 1), structural_error);
  CHECK_THROWS_AS(arnoldi_ritz(apply, 4, 0, 1), structural_error);
  CHECK_THROWS_AS(arnoldi_ritz(apply, 4, 5, 1), structural_error);
}

TEST_CASE("greedy selection starts from the best-covering candidate") {
  const std::vector<Complex> pool{{-1, 0}, {-10, 0}, {-100, 0}};
  const auto one = penzl_select(pool, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == Complex(-10, 0));

  // brute force over the pool confirms the min-max choice
  Complex best = pool[0];
  for (const Complex a : pool)
    if (worst_factor(a, pool) < worst_factor(best, pool)) best = a;
  CHECK(one[0] == best);
}

TEST_CASE("greedy selection: complex pool keeps pairs together") {
  const std::vector<Complex> pool{{-5, 0}, {-1, 2}, {-1, -2}};
  // the real candidate covers the pool better than either pair member
  CHECK(worst_factor({-5, 0}, pool) < worst_factor({-1, 2}, pool));
  const auto one = penzl_select(pool, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == Complex(-5, 0));

  const auto two = penzl_select(pool, 2);  // the pair joins as a unit
  REQUIRE(two.size() == 3);
  CHECK(two[0] == Complex(-5, 0));
  CHECK(two[1].imag() > 0.0);
  CHECK(two[2] == std::conj(two[1]));
}

TEST_CASE("greedy selection: oversized request permutes the pool") {
  const std::vector<Complex> pool{{-5, 0}, {-1, 2}, {-1, -2}, {-3, 0}};
  for (const int count : {4, 9}) {
    const auto out = penzl_select(pool, count);
    CHECK(sorted_by_re_im(out) == sorted_by_re_im(pool));
    CHECK_NOTHROW(ShiftSequence{out, ""}.validate());
  }
  const auto single = penzl_select({Complex(-3, 0)}, 5);
  REQUIRE(single.size() == 1);
  CHECK(single[0] == Complex(-3, 0));
}

TEST_CASE("greedy selection: argument validation") {
  CHECK_THROWS_AS(penzl_select({}, 1), structural_error);
  CHECK_THROWS_AS(penzl_select({Complex(-1, 0)}, 0), structural_error);
  CHECK_THROWS_AS(penzl_select({Complex(1, 0)}, 1), structural_error);
  // conjugation-closed input is required for pair formation
  CHECK_THROWS_AS(penzl_select({Complex(-1, 2), Complex(-4, 0)}, 2), structural_error);
}

TEST_CASE("ordering keeps conjugate units intact") {
  const std::vector<Complex> values{{-3, -4}, {-5, 0}, {-3, 4}, {-3, 0}};
  const auto incr = sort_conjugate_adjacent(values, ShiftOrder::increasing);
  REQUIRE(incr.size() == 4);
  CHECK(incr[0] == Complex(-5, 0));
  CHECK(incr[1] == Complex(-3, 0));  // ties break toward smaller |Im|
  CHECK(incr[2] == Complex(-3, 4));
  CHECK(incr[3] == Complex(-3, -4));

  const auto decr =
      sort_conjugate_adjacent({{-10, 0}, {-1, 0}, {-100, 0}}, ShiftOrder::decreasing);
  CHECK(decr == std::vector<Complex>{{-1, 0}, {-10, 0}, {-100, 0}});

  for (const ShiftOrder order : {ShiftOrder::increasing, ShiftOrder::decreasing}) {
    const auto pair = sort_conjugate_adjacent({{-2, -3}, {-2, 3}}, order);
    REQUIRE(pair.size() == 2);
    CHECK(pair[0] == Complex(-2, 3));
    CHECK(pair[1] == Complex(-2, -3));
  }

  const auto heur = sort_conjugate_adjacent({{-1, 0}, {-10, 0}, {-100, 0}}, ShiftOrder::heuristic);
  REQUIRE(heur.size() == 3);
  CHECK(heur[0] == Complex(-10, 0));  // delegates to the greedy selection
  CHECK(sorted_by_re_im(heur) == sorted_by_re_im({{-1, 0}, {-10, 0}, {-100, 0}}));
}

TEST_CASE("pool construction is deterministic, stable, and size-bounded") {
  auto p = testutil::heat_lyap(100, 1, 2, 7, /*lumped=*/true);
  ShiftedSolver ops(p);
  const ShiftSequence a = heuristic_shifts(ops, 6, 10, 10, 99);
  const ShiftSequence b = heuristic_shifts(ops, 6, 10, 10, 99);
  CHECK(a.values == b.values);
  CHECK(a.origin == "heur:6,10,10");
  CHECK_NOTHROW(a.validate());
  CHECK(a.values.size() >= 1);
  CHECK(a.values.size() <= 7);  // a trailing conjugate may push one past the request

  CHECK_THROWS_AS(heuristic_shifts(ops, 0, 10, 10, 99), structural_error);
  CHECK_THROWS_AS(heuristic_shifts(ops, 6, 0, 10, 99), structural_error);
}

TEST_CASE("projected eigenvalues: identity basis reproduces the spectrum") {
  const Eigen::VectorXd d = (Eigen::VectorXd(4) << -1, -2, -3, -4).finished();
  const Eigen::VectorXd e = (Eigen::VectorXd(4) << 1, 2, 1, 2).finished();
  ShiftedSolver ops(sparse_of(MatrixXd(d.asDiagonal())), sparse_of(MatrixXd(e.asDiagonal())));
  const auto spec = sorted_by_re_im(projected_pencil_eigenvalues(ops, MatrixXd::Identity(4, 4)));
  const auto want = sorted_by_re_im(
      oracle::generalized_spectrum(MatrixXd(d.asDiagonal()), MatrixXd(e.asDiagonal())));
  REQUIRE(spec.size() == want.size());
  for (size_t i = 0; i < spec.size(); ++i) CHECK(std::abs(spec[i] - want[i]) <= 1e-12);
}

TEST_CASE("projected eigenvalues: invariant subspaces give exact values") {
  const Eigen::VectorXd d = (Eigen::VectorXd(4) << -1, -2, -3, -4).finished();
  ShiftedSolver ops = diag_solver(d);
  MatrixXd basis(4, 2);
  basis.setZero();
  basis(0, 0) = 1.0;
  basis(2, 1) = 1.0;
  const auto spec = sorted_by_re_im(projected_pencil_eigenvalues(ops, basis));
  REQUIRE(spec.size() == 2);
  CHECK(std::abs(spec[0] - Complex(-3, 0)) <= 1e-10);
  CHECK(std::abs(spec[1] - Complex(-1, 0)) <= 1e-10);

  // rank-deficient basis: duplicated direction collapses to one value
  MatrixXd rank1(4, 2);
  rank1.col(0) = basis.col(0);
  rank1.col(1) = 2.0 * basis.col(0);
  const auto collapsed = projected_pencil_eigenvalues(ops, rank1);
  REQUIRE(collapsed.size() == 1);
  CHECK(std::abs(collapsed[0] - Complex(-1, 0)) <= 1e-10);

  CHECK_THROWS_AS(projected_pencil_eigenvalues(ops, MatrixXd(3, 1)), structural_error);
}

TEST_CASE("projected eigenvalues see the low-rank correction") {
  ShiftedSolver ops = diag_solver(Eigen::Vector2d(-1.0, -2.0));
  ops.set_update(MatrixXd::Ones(2, 1), MatrixXd::Ones(2, 1));
  MatrixXd dense(2, 2);
  dense << 0, 1, 1, -1;  // diag(-1,-2) + ones
  const auto want = sorted_by_re_im(oracle::generalized_spectrum(dense, MatrixXd::Identity(2, 2)));
  const auto got = sorted_by_re_im(projected_pencil_eigenvalues(ops, MatrixXd::Identity(2, 2)));
  REQUIRE(got.size() == 2);
  for (size_t i = 0; i < 2; ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-10);
}

TEST_CASE("cyclic provider consumes pairs as units and wraps") {
  ShiftedSolver ops = diag_solver(Eigen::VectorXd::Constant(1, -1.0));
  const MatrixXd R = MatrixXd::Zero(1, 1);
  const std::deque<MatrixXd> inc;
  const ShiftContext ctx{ops, R, inc};

  CyclicShiftProvider prov({{Complex(-1, 2), Complex(-1, -2), Complex(-5, 0)}, "fixed"});
  CHECK(prov.next(ctx) == Complex(-1, 2));  // conjugate consumed implicitly
  CHECK(prov.next(ctx) == Complex(-5, 0));
  CHECK(prov.next(ctx) == Complex(-1, 2));  // wrapped around
  CHECK(prov.describe() == "fixed");

  CHECK_THROWS_AS(CyclicShiftProvider({{}, "empty"}), structural_error);
  CHECK_THROWS_AS(CyclicShiftProvider({{Complex(2, 0)}, "unstable"}), structural_error);
}

TEST_CASE("pool provider computes lazily and then cycles") {
  auto p = testutil::heat_lyap(20, 1, 1, 3);
  ShiftedSolver ops(p);
  const MatrixXd R = p.G;
  const std::deque<MatrixXd> inc;
  const ShiftContext ctx{ops, R, inc};

  PenzlShiftProvider prov(4, 8, 8, 17);
  CHECK(prov.sequence().values.empty());  // nothing happens before first use
  const Complex first = prov.next(ctx);
  const ShiftSequence seq = prov.sequence();
  REQUIRE(!seq.values.empty());
  CHECK(first == seq.values[0]);
  CHECK_NOTHROW(seq.validate());
  // a full cycle returns to the first value
  size_t consumed = first.imag() != 0.0 ? 2 : 1;
  while (consumed < seq.values.size()) {
    const Complex a = prov.next(ctx);
    CHECK(a == seq.values[consumed]);
    consumed += a.imag() != 0.0 ? 2 : 1;
  }
  CHECK(prov.next(ctx) == seq.values[0]);
  CHECK(prov.describe() == "heur:4,8,8");
}

TEST_CASE("projection provider regenerates from the recent increment span") {
  const Eigen::VectorXd d = (Eigen::VectorXd(4) << -1, -2, -3, -4).finished();
  ShiftedSolver ops = diag_solver(d);
  MatrixXd R(4, 2);
  R.setZero();
  R(0, 0) = 1.0;
  R(1, 1) = 1.0;

  std::deque<MatrixXd> inc;
  ShiftContext ctx{ops, R, inc};
  ProjectionShiftProvider prov(ShiftOrder::decreasing, 2);
  // before any step the residual factor is the only available span
  CHECK(prov.next(ctx) == Complex(-1, 0));
  CHECK(prov.regenerations() == 1);
  CHECK(prov.next(ctx) == Complex(-2, 0));

  // once increments exist, the window of newest blocks forms the basis
  MatrixXd v3 = MatrixXd::Zero(4, 1), v4 = MatrixXd::Zero(4, 1);
  v3(2, 0) = 1.0;
  v4(3, 0) = 1.0;
  inc.push_back(v3);
  inc.push_back(v4);
  CHECK(prov.next(ctx) == Complex(-3, 0));
  CHECK(prov.regenerations() == 2);
  CHECK(prov.next(ctx) == Complex(-4, 0));
  CHECK(prov.describe() == "proj:decr:2");

  ProjectionShiftProvider narrow(ShiftOrder::decreasing, 1);
  CHECK(narrow.next(ctx) == Complex(-4, 0));  // window of one block: newest only

  CHECK_THROWS_AS(ProjectionShiftProvider(ShiftOrder::heuristic, 0), structural_error);
}

TEST_CASE("projection provider falls back to the previous list") {
  MatrixXd A(2, 2);
  A << -1, 10, 0, -1;  // stable, but some Rayleigh quotients are positive
  ShiftedSolver ops(sparse_of(A), speye(2));
  std::deque<MatrixXd> inc;

  const MatrixXd good = MatrixXd::Identity(2, 2).col(0);
  MatrixXd bad(2, 1);
  bad << 1, 1;  // projects to the unstable quotient 4 > 0

  ProjectionShiftProvider prov(ShiftOrder::decreasing, 2);
  ShiftContext good_ctx{ops, good, inc};
  CHECK(prov.next(good_ctx) == Complex(-1, 0));
  ShiftContext bad_ctx{ops, bad, inc};
  CHECK(prov.next(bad_ctx) == Complex(-1, 0));  // nothing stable: reuse the old list
  CHECK(prov.regenerations() == 2);

  ProjectionShiftProvider cold(ShiftOrder::decreasing, 2);
  CHECK_THROWS_AS(cold.next(bad_ctx), numerical_error);  // no list to fall back to
}

TEST_CASE("strategy text round-trips") {
  const ShiftStrategy h = ShiftStrategy::parse("heur:8,12,6");
  CHECK(h.kind == ShiftStrategy::Kind::heuristic);
  CHECK(h.count == 8);
  CHECK(h.steps_plus == 12);
  CHECK(h.steps_minus == 6);
  CHECK(h.describe() == "heur:8,12,6");
  CHECK(h.make_provider()->describe() == "heur:8,12,6");

  const ShiftStrategy p = ShiftStrategy::parse("proj:decr:3");
  CHECK(p.kind == ShiftStrategy::Kind::projection);
  CHECK(p.order == ShiftOrder::decreasing);
  CHECK(p.window == 3);
  CHECK(p.describe() == "proj:decr:3");
  CHECK(p.make_provider()->describe() == "proj:decr:3");

  for (const char* bad : {"", "nope", "heur", "heur:1", "heur:1,2", "heur:a,b,c", "heur:0,5,5",
                          "proj:spin:2", "proj:decr", "proj:decr:0", "proj:decr:x"})
    CHECK_THROWS_AS(ShiftStrategy::parse(bad), structural_error);
}

TEST_SUITE_END();
