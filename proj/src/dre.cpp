#include "lradi/dre.hpp"

#include <Eigen/SparseLU>

namespace lradi {

void DreOptions::validate() const {
  if (!(tf > t0)) throw structural_error("dre options: need tf > t0");
  if (steps < 1) throw structural_error("dre options: need at least one step");
  if (!(adi_reltol > 0.0)) throw structural_error("dre options: inner tolerance must be positive");
  if (adi_max_iters < 1) throw structural_error("dre options: inner iteration budget must be positive");
}

LyapunovProblem dre_step_problem(const RiccatiProblem& p, const LowRankFactor& X, double tau) {
  p.check();
  X.check();
  if (X.rows() != p.n()) throw structural_error("dre step: iterate has wrong row count");
  if (!(tau > 0.0)) throw structural_error("dre step: step size must be positive");
  const Index n = p.n(), q = p.C.rows(), z = X.cols();

  LyapunovProblem lp;
  lp.A = SpMat((p.A - (0.5 / tau) * p.E).transpose());
  lp.E = p.E.transpose();
  if (z > 0) {
    const MatrixXd ZtB = X.Z.transpose() * p.B;
    const MatrixXd EtZ = p.E.transpose() * X.Z;
    lp.U = -(EtZ * (X.Y * ZtB));  // closed-loop part -E^T X B
    lp.V = p.B;

    lp.G.resize(n, q + z);
    lp.G.leftCols(q) = p.C.transpose();
    lp.G.rightCols(z) = EtZ;
    const MatrixXd YZtB = X.Y * ZtB;
    lp.S = MatrixXd::Zero(q + z, q + z);
    lp.S.topLeftCorner(q, q).setIdentity();
    lp.S.bottomRightCorner(z, z) = YZtB * YZtB.transpose() + (1.0 / tau) * X.Y;
  } else {
    lp.U.resize(n, 0);
    lp.V.resize(n, 0);
    lp.G = p.C.transpose();
    lp.S = MatrixXd::Identity(q, q);
  }

  // the right-hand-side rank grows with the iterate; truncate before solving
  LowRankFactor rhs{lp.G, lp.S};
  rhs = compress(rhs);
  lp.G = std::move(rhs.Z);
  lp.S = std::move(rhs.Y);
  return lp;
}

LowRankFactor dre_initial_value(const RiccatiProblem& p) {
  p.check();
  Eigen::SparseLU<SpMat> lu;
  lu.compute(SpMat(p.E.transpose()));
  if (lu.info() != Eigen::Success) throw numerical_error("dre initial value: E is singular");
  LowRankFactor X0;
  X0.Z = lu.solve(MatrixXd(p.C.transpose()));
  X0.Y = MatrixXd::Identity(p.C.rows(), p.C.rows());
  return X0;
}

DreResult integrate_dre(const RiccatiProblem& p, const DreOptions& opt) {
  p.check();
  opt.validate();
  const double tau = (opt.tf - opt.t0) / opt.steps;

  Stopwatch run_clock;
  DreResult out;
  DreTrace& tr = out.trace;

  // the sparse part A^T - E^T/(2 tau) is the same in every step; share its
  // shifted factorizations across the whole integration
  ShiftedSolver solver(SpMat((p.A - (0.5 / tau) * p.E).transpose()), SpMat(p.E.transpose()));

  LowRankFactor X = dre_initial_value(p);
  out.t.push_back(opt.t0);
  out.X.push_back(X);

  for (int l = 0; l < opt.steps; ++l) {
    Stopwatch step_clock;
    DreStepRecord rec;
    rec.step = l + 1;
    rec.t = opt.t0 + (l + 1) * tau;

    const LyapunovProblem lp = dre_step_problem(p, X, tau);
    AdiOptions inner;
    inner.reltol = opt.adi_reltol;
    inner.max_iters = opt.adi_max_iters;
    const auto provider = opt.shifts.make_provider(static_cast<std::uint64_t>(l));
    const LowRankFactor X0 = opt.warm_start ? X : LowRankFactor::zero(p.n());

    AdiResult ar = solve_lyapunov(lp, X0, *provider, inner, &solver);
    if (!ar.converged) {
      tr.warnings.push_back("inner solve for step " + std::to_string(l + 1) +
                            " hit its iteration budget");
      tr.all_steps_converged = false;
    }
    X = std::move(ar.X);

    rec.adi_iterations = ar.trace.iterations;
    rec.adi_solves = ar.trace.solves;
    rec.adi_converged = ar.converged;
    rec.adi_residual = ar.trace.final_residual;
    rec.iterate_cols = X.cols();
    rec.t_shifts = ar.trace.t_shifts;
    rec.t_solve = ar.trace.t_solve;
    rec.t_compress = ar.trace.t_compress;
    rec.t_total = step_clock.lap();
    tr.total_adi_iterations += rec.adi_iterations;
    tr.total_solves += rec.adi_solves;
    tr.t_shifts += rec.t_shifts;
    tr.t_solve += rec.t_solve;
    tr.t_compress += rec.t_compress;
    tr.steps.push_back(rec);

    if (opt.store_trajectory || l + 1 == opt.steps) {
      out.t.push_back(rec.t);
      out.X.push_back(X);
    }
  }

  out.converged = tr.all_steps_converged;
  tr.t_total = run_clock.lap();
  return out;
}

}  // namespace lradi
