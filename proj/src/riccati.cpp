#include "lradi/riccati.hpp"

#include <cmath>

namespace lradi {

NewtonMode parse_newton_mode(const std::string& name) {
  if (name == "classical") return NewtonMode::classical;
  if (name == "inexact") return NewtonMode::inexact;
  if (name == "hybrid") return NewtonMode::hybrid;
  throw structural_error("unknown newton mode: " + name);
}

std::string to_string(NewtonMode mode) {
  switch (mode) {
    case NewtonMode::classical: return "classical";
    case NewtonMode::inexact: return "inexact";
    case NewtonMode::hybrid: return "hybrid";
  }
  return "?";
}

void NewtonOptions::validate() const {
  if (!(reltol > 0.0)) throw structural_error("newton options: reltol must be positive");
  if (max_iters < 1 || adi_max_iters < 1)
    throw structural_error("newton options: iteration budgets must be positive");
}

LyapunovProblem newton_step_problem(const RiccatiProblem& p, const LowRankFactor& X) {
  p.check();
  X.check();
  if (X.rows() != p.n()) throw structural_error("newton step: iterate has wrong row count");
  const Index n = p.n(), m = p.B.cols(), q = p.C.rows();

  LyapunovProblem lp;
  lp.A = p.A.transpose();
  lp.E = p.E.transpose();
  MatrixXd EtXB = MatrixXd::Zero(n, m);
  if (!X.empty()) {
    const MatrixXd ZtB = X.Z.transpose() * p.B;
    const MatrixXd EtZ = p.E.transpose() * X.Z;
    EtXB.noalias() = EtZ * (X.Y * ZtB);
    lp.U = -EtXB;
    lp.V = p.B;
  } else {
    lp.U.resize(n, 0);
    lp.V.resize(n, 0);
  }
  lp.G.resize(n, q + m);
  lp.G.leftCols(q) = p.C.transpose();
  lp.G.rightCols(m) = EtXB;
  lp.S = MatrixXd::Identity(q + m, q + m);
  return lp;
}

double riccati_residual_norm(const RiccatiProblem& p, const LowRankFactor& X) {
  p.check();
  X.check();
  if (X.rows() != p.n()) throw structural_error("riccati residual: iterate has wrong row count");
  const Index n = p.n(), q = p.C.rows(), z = X.cols();

  MatrixXd R(n, q + 2 * z);
  R.leftCols(q) = p.C.transpose();
  MatrixXd T = MatrixXd::Zero(q + 2 * z, q + 2 * z);
  T.topLeftCorner(q, q).setIdentity();
  if (z > 0) {
    R.middleCols(q, z) = p.A.transpose() * X.Z;
    R.rightCols(z) = p.E.transpose() * X.Z;
    const MatrixXd YZtB = X.Y * (X.Z.transpose() * p.B);
    T.block(q, q + z, z, z) = X.Y;
    T.block(q + z, q, z, z) = X.Y;
    T.block(q + z, q + z, z, z) = -YZtB * YZtB.transpose();
  }
  return frobenius_norm<double>(R, T);
}

NewtonResult solve_riccati_newton(const RiccatiProblem& p, const NewtonOptions& opt) {
  p.check();
  opt.validate();
  const Index n = p.n(), q = p.C.rows();

  Stopwatch run_clock;
  NewtonResult out;
  NewtonTrace& tr = out.trace;

  const double cc_norm =
      frobenius_norm<double>(MatrixXd(p.C.transpose()), MatrixXd::Identity(q, q));
  tr.rhs_norm = cc_norm;

  // one solver for all steps: the sparse part A^T never changes, only the
  // rank-m closed-loop correction does, so factorizations carry over
  ShiftedSolver solver(SpMat(p.A.transpose()), SpMat(p.E.transpose()));

  LowRankFactor X = LowRankFactor::zero(n);
  double res = riccati_residual_norm(p, X);
  for (int l = 0; l < opt.max_iters && res > opt.reltol * cc_norm; ++l) {
    Stopwatch step_clock;
    NewtonStepRecord rec;
    rec.step = l;
    rec.residual = res;

    const LyapunovProblem lp = newton_step_problem(p, X);
    AdiOptions inner;
    inner.max_iters = opt.adi_max_iters;
    switch (opt.mode) {
      case NewtonMode::classical:
        inner.reltol = opt.reltol / 10.0;
        break;
      case NewtonMode::inexact: {
        const double eta = std::min(0.1, 0.9 * res / cc_norm);
        inner.abstol = eta * res;
        break;
      }
      case NewtonMode::hybrid: {
        const double eta = std::min(0.1, 0.9 * res / cc_norm);
        inner.abstol = std::max(eta * res, opt.reltol / 10.0 * frobenius_norm<double>(lp.G, lp.S));
        break;
      }
    }

    const auto provider = opt.shifts.make_provider(static_cast<std::uint64_t>(l));
    const LowRankFactor X0 = opt.warm_start ? X : LowRankFactor::zero(n);
    AdiResult ar = solve_lyapunov(lp, X0, *provider, inner, &solver);
    if (!ar.converged)
      tr.warnings.push_back("inner solve at newton step " + std::to_string(l) +
                            " hit its iteration budget");
    rec.inner_tolerance = ar.trace.threshold;
    rec.adi_iterations = ar.trace.iterations;
    rec.adi_solves = ar.trace.solves;
    rec.t_shifts = ar.trace.t_shifts;
    rec.t_solve = ar.trace.t_solve;
    rec.t_compress = ar.trace.t_compress;

    LowRankFactor Xn = std::move(ar.X);
    double res_n = riccati_residual_norm(p, Xn);
    if (opt.line_search && res_n > 0.9 * res) {
      // Armijo backtracking along the factored segment X + lambda (Xn - X);
      // the blend is a concatenation with scaled inner factors, then truncated
      LowRankFactor best = Xn;
      double best_res = res_n, best_lambda = 1.0;
      bool accepted = false;
      for (int h = 0; h <= 10; ++h) {
        const double lambda = std::pow(0.5, h);
        LowRankFactor Xc = h == 0 ? Xn : compress(add(scaled(X, 1.0 - lambda), scaled(Xn, lambda)));
        const double rc = h == 0 ? res_n : riccati_residual_norm(p, Xc);
        if (rc <= (1.0 - 1e-4 * lambda) * res) {
          Xn = std::move(Xc);
          res_n = rc;
          rec.line_search_lambda = lambda;
          accepted = true;
          break;
        }
        if (rc < best_res) {
          best_res = rc;
          best = std::move(Xc);
          best_lambda = lambda;
        }
      }
      if (!accepted) {
        Xn = std::move(best);
        res_n = best_res;
        rec.line_search_lambda = best_lambda;
        tr.warnings.push_back("line search at newton step " + std::to_string(l) +
                              " found no sufficient decrease");
      }
    }

    X = std::move(Xn);
    res = res_n;
    rec.iterate_cols = X.cols();
    rec.t_total = step_clock.lap();
    tr.total_adi_iterations += rec.adi_iterations;
    tr.total_solves += rec.adi_solves;
    tr.t_shifts += rec.t_shifts;
    tr.t_solve += rec.t_solve;
    tr.t_compress += rec.t_compress;
    tr.steps.push_back(rec);
  }

  out.X = std::move(X);
  out.converged = res <= opt.reltol * cc_norm;
  tr.converged = out.converged;
  tr.final_residual = res;
  tr.t_total = run_clock.lap();
  return out;
}

}  // namespace lradi
