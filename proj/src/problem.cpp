#include "lradi/problem.hpp"

namespace lradi {

void LyapunovProblem::check() const {
  const Index nn = A.rows();
  if (A.cols() != nn || E.rows() != nn || E.cols() != nn)
    throw structural_error("lyapunov problem: A and E must be square and of equal order");
  if (U.cols() != V.cols() || (U.cols() > 0 && (U.rows() != nn || V.rows() != nn)))
    throw structural_error("lyapunov problem: low-rank correction factors must be n x p");
  if (G.rows() != nn) throw structural_error("lyapunov problem: right-hand-side factor must have n rows");
  if (S.rows() != G.cols() || S.cols() != G.cols())
    throw structural_error("lyapunov problem: inner right-hand-side factor must be square of order G.cols()");
}

MatrixXd LyapunovProblem::apply_coefficient(const MatrixXd& X) const {
  MatrixXd out = A * X;
  if (has_update()) out.noalias() += U * (V.transpose() * X);
  return out;
}

MatrixXd LyapunovProblem::coefficient_dense() const {
  MatrixXd out = MatrixXd(A);
  if (has_update()) out.noalias() += U * V.transpose();
  return out;
}

void RiccatiProblem::check() const {
  const Index nn = A.rows();
  if (A.cols() != nn || E.rows() != nn || E.cols() != nn)
    throw structural_error("riccati problem: A and E must be square and of equal order");
  if (B.rows() != nn) throw structural_error("riccati problem: B must have n rows");
  if (C.cols() != nn) throw structural_error("riccati problem: C must have n columns");
}

}  // namespace lradi
