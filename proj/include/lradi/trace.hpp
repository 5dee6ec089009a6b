#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "lradi/types.hpp"

namespace lradi {

// interval timer for the per-phase accounting buckets
class Stopwatch {
 public:
  Stopwatch() : last_(clock::now()) {}
  // seconds since construction or the previous lap
  double lap() {
    const auto now = clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point last_;
};

struct AdiIterationRecord {
  int k = 0;  // iterations completed; a paired step advances by 2
  double residual_norm = 0;
  Index residual_cols = 0;
  long cumulative_solves = 0;
  double t_compress = 0, t_shifts = 0, t_solve = 0, t_total = 0;  // seconds in this step
};

struct AdiTrace {
  std::vector<AdiIterationRecord> rows;
  std::vector<std::string> warnings;
  std::vector<Complex> shifts_used;
  std::string shift_origin;
  int iterations = 0;
  long solves = 0;
  double rhs_norm = 0, threshold = 0, initial_residual = 0, final_residual = 0;
  Index solution_cols = 0;
  double t_compress = 0, t_shifts = 0, t_solve = 0, t_total = 0;
  bool converged = false;
};

struct NewtonStepRecord {
  int step = 0;
  double residual = 0;         // nonlinear residual before the step
  double inner_tolerance = 0;  // absolute tolerance handed to the inner solve
  int adi_iterations = 0;
  long adi_solves = 0;
  double line_search_lambda = 1.0;
  Index iterate_cols = 0;
  double t_compress = 0, t_shifts = 0, t_solve = 0, t_total = 0;
};

struct NewtonTrace {
  std::vector<NewtonStepRecord> steps;
  std::vector<std::string> warnings;
  double rhs_norm = 0, final_residual = 0;
  int total_adi_iterations = 0;
  long total_solves = 0;
  double t_compress = 0, t_shifts = 0, t_solve = 0, t_total = 0;
  bool converged = false;
};

struct DreStepRecord {
  int step = 0;
  double t = 0;  // time point reached
  int adi_iterations = 0;
  long adi_solves = 0;
  bool adi_converged = true;
  double adi_residual = 0;
  Index iterate_cols = 0;
  double t_compress = 0, t_shifts = 0, t_solve = 0, t_total = 0;
};

struct DreTrace {
  std::vector<DreStepRecord> steps;
  std::vector<std::string> warnings;
  int total_adi_iterations = 0;
  long total_solves = 0;
  double t_compress = 0, t_shifts = 0, t_solve = 0, t_total = 0;
  bool all_steps_converged = true;
};

}  // namespace lradi
