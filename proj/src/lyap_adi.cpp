#include "lradi/lyap_adi.hpp"

#include <cmath>
#include <deque>
#include <memory>

namespace lradi {

void AdiOptions::validate() const {
  if (abstol.has_value() == reltol.has_value())
    throw structural_error("adi options: exactly one of abstol / reltol must be set");
  if ((abstol && !(*abstol >= 0.0)) || (reltol && !(*reltol >= 0.0)))
    throw structural_error("adi options: tolerance must be nonnegative");
  if (max_iters < 0) throw structural_error("adi options: max_iters must be nonnegative");
}

MatrixXd initial_residual_factor(const LyapunovProblem& p, const LowRankFactor& X0) {
  p.check();
  X0.check();
  if (X0.rows() != p.n())
    throw structural_error("initial residual: initial value has wrong row count");
  const Index g = p.G.cols(), z = X0.cols();
  MatrixXd R(p.n(), g + 2 * z);
  R.leftCols(g) = p.G;
  if (z > 0) {
    R.middleCols(g, z) = p.E * X0.Z;
    R.rightCols(z) = p.apply_coefficient(X0.Z);
  }
  return R;
}

MatrixXd initial_residual_inner(const LyapunovProblem& p, const LowRankFactor& X0) {
  p.check();
  X0.check();
  const Index g = p.G.cols(), z = X0.cols();
  MatrixXd T = MatrixXd::Zero(g + 2 * z, g + 2 * z);
  T.topLeftCorner(g, g) = p.S;
  if (z > 0) {
    T.block(g, g + z, z, z) = X0.Y;
    T.block(g + z, g, z, z) = X0.Y;
  }
  return T;
}

namespace {

// accumulated + pending increment blocks (inner factors s_i * T), no truncation
LowRankFactor fold_blocks(const LowRankFactor& acc, const std::vector<MatrixXd>& blocks,
                          const std::vector<double>& scales, const MatrixXd& T) {
  if (blocks.empty()) return acc;
  Index extra = 0;
  for (const auto& b : blocks) extra += b.cols();
  LowRankFactor out;
  const Index z0 = acc.cols();
  out.Z.resize(acc.rows(), z0 + extra);
  out.Y = MatrixXd::Zero(z0 + extra, z0 + extra);
  out.Z.leftCols(z0) = acc.Z;
  out.Y.topLeftCorner(z0, z0) = acc.Y;
  Index at = z0;
  for (size_t i = 0; i < blocks.size(); ++i) {
    const Index w = blocks[i].cols();
    out.Z.middleCols(at, w) = blocks[i];
    out.Y.block(at, at, w, w) = scales[i] * T;
    at += w;
  }
  return out;
}

}  // namespace

LowRankFactor AdiStepView::assemble() const {
  return fold_blocks(accumulated, pending_blocks, pending_scales, residual_inner);
}

AdiResult solve_lyapunov(const LyapunovProblem& p, ShiftProvider& shifts, const AdiOptions& opt) {
  return solve_lyapunov(p, LowRankFactor::zero(p.n()), shifts, opt);
}

AdiResult solve_lyapunov(const LyapunovProblem& p, const LowRankFactor& X0, ShiftProvider& shifts,
                         const AdiOptions& opt, ShiftedSolver* solver, const AdiObserver& observer) {
  p.check();
  opt.validate();
  X0.check();
  if (X0.rows() != p.n()) throw structural_error("adi: initial value has wrong row count");

  Stopwatch run_clock;
  AdiResult res;
  AdiTrace& tr = res.trace;
  tr.shift_origin = shifts.describe();
  if (3 * p.G.cols() > p.n())
    tr.warnings.push_back("right-hand-side factor is wide relative to n; factored iteration has no rank advantage");

  std::unique_ptr<ShiftedSolver> own;
  if (!solver) {
    own = std::make_unique<ShiftedSolver>(p);
    solver = own.get();
  } else {
    if (solver->n() != p.n()) throw structural_error("adi: shared solver is bound to a different order");
    solver->set_update(p.U, p.V);
  }

  tr.rhs_norm = frobenius_norm<double>(p.G, p.S);
  tr.threshold = opt.abstol ? *opt.abstol : *opt.reltol * tr.rhs_norm;

  MatrixXd R = initial_residual_factor(p, X0);
  const MatrixXd T = initial_residual_inner(p, X0);
  double rnorm = frobenius_norm<double>(R, T);
  tr.initial_residual = rnorm;

  LowRankFactor acc = X0;
  std::vector<MatrixXd> blocks;
  std::vector<double> scales;
  std::deque<MatrixXd> recent;
  const long solves_at_entry = solver->solve_calls();
  int additions = 0;
  int k = 0;

  tr.rows.push_back({0, rnorm, R.cols(), 0, 0, 0, 0, 0});
  if (observer) observer(AdiStepView{0, rnorm, R, T, acc, blocks, scales});

  while (rnorm > tr.threshold && k < opt.max_iters) {
    Stopwatch step_clock, phase;
    AdiIterationRecord row;

    const Complex alpha = shifts.next(ShiftContext{*solver, R, recent});
    row.t_shifts = phase.lap();
    if (!(alpha.real() < 0.0)) throw structural_error("adi: shift provider produced an unstable shift");
    tr.shifts_used.push_back(alpha);

    int appended = 0;
    if (alpha.imag() == 0.0) {
      const double a = alpha.real();
      MatrixXd V = solver->solve(a, R);
      R.noalias() -= (2.0 * a) * (p.E * V);
      blocks.push_back(std::move(V));
      scales.push_back(-2.0 * a);
      appended = 1;
      k += 1;
    } else {
      // paired step for (alpha, conj alpha), carried out in real arithmetic:
      // one complex solve, two real increment blocks, residual stays real
      const double a = alpha.real(), b = alpha.imag();
      const double delta = a / b;
      const MatrixXcd Vc = solver->solve(alpha, R.cast<Complex>());
      MatrixXd V1 = std::sqrt(2.0) * (Vc.real() + delta * Vc.imag());
      MatrixXd V2 = std::sqrt(2.0 * delta * delta + 2.0) * Vc.imag();
      R.noalias() -= (2.0 * std::sqrt(2.0) * a) * (p.E * V1);
      blocks.push_back(std::move(V1));
      scales.push_back(-2.0 * a);
      blocks.push_back(std::move(V2));
      scales.push_back(-2.0 * a);
      tr.shifts_used.push_back(std::conj(alpha));
      appended = 2;
      k += 2;
    }
    row.t_solve = phase.lap();

    for (int i = appended; i >= 1; --i) recent.push_back(blocks[blocks.size() - static_cast<size_t>(i)]);
    while (recent.size() > 4) recent.pop_front();

    additions += appended;
    rnorm = frobenius_norm<double>(R, T);

    Index zc = acc.cols();
    for (const auto& b : blocks) zc += b.cols();
    phase.lap();
    if (compression_due(additions, zc, p.n())) {
      acc = compress(fold_blocks(acc, blocks, scales, T));
      blocks.clear();
      scales.clear();
      additions = 0;
    }
    row.t_compress = phase.lap();

    row.k = k;
    row.residual_norm = rnorm;
    row.residual_cols = R.cols();
    row.cumulative_solves = solver->solve_calls() - solves_at_entry;
    row.t_total = step_clock.lap();
    tr.rows.push_back(row);
    tr.t_shifts += row.t_shifts;
    tr.t_solve += row.t_solve;
    tr.t_compress += row.t_compress;
    if (observer) observer(AdiStepView{k, rnorm, R, T, acc, blocks, scales});
  }

  if (k > 0) {
    Stopwatch phase;
    acc = compress(fold_blocks(acc, blocks, scales, T));
    tr.t_compress += phase.lap();
  }

  res.X = std::move(acc);
  res.converged = rnorm <= tr.threshold;
  tr.converged = res.converged;
  tr.iterations = k;
  tr.final_residual = rnorm;
  tr.solution_cols = res.X.cols();
  tr.solves = solver->solve_calls() - solves_at_entry;
  tr.t_total = run_clock.lap();
  return res;
}

}  // namespace lradi
