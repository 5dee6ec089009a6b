#pragma once

#include <functional>
#include <optional>

#include "lradi/lowrank.hpp"
#include "lradi/pencil.hpp"
#include "lradi/problem.hpp"
#include "lradi/shifts.hpp"
#include "lradi/trace.hpp"

namespace lradi {

struct AdiOptions {
  std::optional<double> abstol;  // on the residual || L(X_k) ||_F ...
  std::optional<double> reltol;  // ... or relative to || G S G^T ||_F; exactly one
  int max_iters = 100;
  void validate() const;
};

// Diagnostic snapshot handed to an observer after every completed step.
struct AdiStepView {
  int k;
  double residual_norm;
  const MatrixXd& residual_factor;  // R with || L(X_k) ||_F = || R T R^T ||_F
  const MatrixXd& residual_inner;   // T, fixed over the whole solve
  const LowRankFactor& accumulated;  // initial value plus increments folded so far
  const std::vector<MatrixXd>& pending_blocks;   // increments not folded yet
  const std::vector<double>& pending_scales;     // -2 Re(alpha) per pending block
  LowRankFactor assemble() const;  // accumulated + pending, without truncation
};

using AdiObserver = std::function<void(const AdiStepView&)>;

struct AdiResult {
  LowRankFactor X;
  bool converged = false;
  AdiTrace trace;
};

// Residual of the initial value in factored form: the residual of X0 = Z0 Y0 Z0^T
// for F X E^T + E X F^T = -G S G^T is R0 T R0^T with
//
//   R0 = [G, E Z0, F Z0],   T = blkdiag(S, [[0, Y0], [Y0, 0]]).
//
// T never changes during the iteration; every increment block reuses it.
MatrixXd initial_residual_factor(const LyapunovProblem& p, const LowRankFactor& X0);
MatrixXd initial_residual_inner(const LyapunovProblem& p, const LowRankFactor& X0);

// Low-rank alternating-directions iteration for F X E^T + E X F^T = -G S G^T,
// F = A + U V^T, from the (possibly empty) initial value X0. One shifted solve
// per step; a conjugate shift pair is consumed by a single paired step in real
// arithmetic. The result factor collects X0 and one increment block per
// iteration, truncated on the usual schedule. Non-convergence within max_iters
// is reported through the result, not thrown.
//
// `solver` optionally shares cached factorizations across solves; it must be
// bound to the same sparse pair (A, E) (its dense correction is rebound here).
AdiResult solve_lyapunov(const LyapunovProblem& p, const LowRankFactor& X0, ShiftProvider& shifts,
                         const AdiOptions& opt, ShiftedSolver* solver = nullptr,
                         const AdiObserver& observer = nullptr);

AdiResult solve_lyapunov(const LyapunovProblem& p, ShiftProvider& shifts, const AdiOptions& opt);

}  // namespace lradi
