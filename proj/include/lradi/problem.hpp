#pragma once

#include <Eigen/SparseCore>

#include "lradi/lowrank.hpp"
#include "lradi/types.hpp"

namespace lradi {

// Generalized Lyapunov equation in factored form,
//
//   F X E^T + E X F^T = -G S G^T,   F = A + U V^T,
//
// with sparse A, E and an optional dense low-rank correction U V^T (p columns,
// p == 0 means none; the corrected coefficient is never materialized). G is the
// n x g right-hand-side factor, S its small symmetric inner factor.
struct LyapunovProblem {
  SpMat A;
  SpMat E;
  MatrixXd U;  // n x p
  MatrixXd V;  // n x p
  MatrixXd G;  // n x g
  MatrixXd S;  // g x g

  Index n() const { return A.rows(); }
  bool has_update() const { return U.cols() > 0; }

  void check() const;

  // (A + U V^T) X for a dense block X
  MatrixXd apply_coefficient(const MatrixXd& X) const;

  // A + U V^T as a dense matrix; desk-scale diagnostics and tests only
  MatrixXd coefficient_dense() const;
};

// Continuous-time algebraic Riccati equation in control-theoretic form,
//
//   C^T C + A^T X E + E^T X A - E^T X B B^T X E = 0,
//
// with sparse A, E, dense input map B (n x m) and output map C (q x n).
struct RiccatiProblem {
  SpMat A;
  SpMat E;
  MatrixXd B;
  MatrixXd C;

  Index n() const { return A.rows(); }
  void check() const;
};

}  // namespace lradi
