#pragma once

#include "lradi/lyap_adi.hpp"

namespace lradi {

struct DreOptions {
  double t0 = 0.0, tf = 1.0;
  int steps = 10;              // uniform grid
  double adi_reltol = 1e-10;   // inner tolerance, relative to the step right-hand side
  int adi_max_iters = 200;
  ShiftStrategy shifts;
  bool warm_start = true;       // start each inner solve from the previous time point
  bool store_trajectory = true; // keep every X(t_i); otherwise only the endpoints
  void validate() const;
};

struct DreResult {
  std::vector<double> t;
  std::vector<LowRankFactor> X;  // matches t
  bool converged = false;        // every inner solve met its tolerance
  DreTrace trace;
};

// Backward-in-mind time stepping for the forward differential equation
//
//   E^T dX/dt E = C^T C + A^T X E + E^T X A - E^T X B B^T X E,
//   E^T X(t0) E = C^T C,
//
// by a linearly implicit first-order scheme: each step solves one Lyapunov
// equation with the step coefficient A - E/(2 tau) - B B^T X E on the transposed
// pencil. The step right-hand side is rank-truncated before the solve.
LyapunovProblem dre_step_problem(const RiccatiProblem& p, const LowRankFactor& X, double tau);

// factored initial value X(t0) = (E^{-T} C^T)(E^{-T} C^T)^T
LowRankFactor dre_initial_value(const RiccatiProblem& p);

DreResult integrate_dre(const RiccatiProblem& p, const DreOptions& opt);

}  // namespace lradi
