#pragma once

#include "lradi/lyap_adi.hpp"

namespace lradi {

// How the inner tolerance of each Newton step is chosen:
//  - classical: fixed relative tolerance, one tenth of the outer one
//  - inexact:   forcing term  eta * (current nonlinear residual),
//               eta = min{0.1, 0.9 * residual / ||C^T C||}
//  - hybrid:    the looser of the two (max of the absolute thresholds)
enum class NewtonMode { classical, inexact, hybrid };

NewtonMode parse_newton_mode(const std::string& name);
std::string to_string(NewtonMode mode);

struct NewtonOptions {
  NewtonMode mode = NewtonMode::classical;
  bool line_search = false;
  bool warm_start = true;  // start each inner solve from the current iterate
  double reltol = 1e-10;   // on the nonlinear residual, relative to ||C^T C||
  int max_iters = 30;
  int adi_max_iters = 200;
  ShiftStrategy shifts;
  void validate() const;
};

struct NewtonResult {
  LowRankFactor X;
  bool converged = false;
  NewtonTrace trace;
};

// The linearization at iterate X is a Lyapunov equation for the closed-loop
// coefficient A - B B^T X E. Posed on the transposed pencil, its sparse part is
// A^T, the closed-loop correction becomes the rank-m update (-E^T X B) B^T, and
// the right-hand-side factor is [C^T, E^T X B] with identity inner factor.
// Nothing n x n is ever formed.
LyapunovProblem newton_step_problem(const RiccatiProblem& p, const LowRankFactor& X);

// || C^T C + A^T X E + E^T X A - E^T X B B^T X E ||_F straight from the factors:
// the residual equals R T R^T with R = [C^T, A^T Z, E^T Z] and a fixed small T.
double riccati_residual_norm(const RiccatiProblem& p, const LowRankFactor& X);

NewtonResult solve_riccati_newton(const RiccatiProblem& p, const NewtonOptions& opt);

}  // namespace lradi
