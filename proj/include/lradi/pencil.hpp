#pragma once

#include <Eigen/SparseLU>

#include <list>
#include <map>
#include <memory>
#include <utility>

#include "lradi/problem.hpp"
#include "lradi/types.hpp"

namespace lradi {

// Shifted solves  (A + U V^T + alpha E) X = RHS  against a fixed sparse pair (A, E).
//
// The sparse part A + alpha E is LU-factored once per distinct shift and kept in a
// bounded cache (shift lists repeat cyclically, so hits are the common case). The
// dense correction U V^T never enters a factorization; it is folded in through the
// Sherman-Morrison-Woodbury identity against the cached LU. U and V may be swapped
// out between solves (driver outer iterations) without invalidating any LU.
// Real shifts stay entirely in real arithmetic.
class ShiftedSolver {
 public:
  ShiftedSolver(SpMat A, SpMat E);
  explicit ShiftedSolver(const LyapunovProblem& p);

  // replace the low-rank correction; cached factorizations stay valid
  void set_update(const MatrixXd& U, const MatrixXd& V);

  MatrixXd solve(double alpha, const MatrixXd& rhs);
  MatrixXcd solve(Complex alpha, const MatrixXcd& rhs);

  // operator actions used by eigenvalue estimation
  VectorXd apply_coefficient(const VectorXd& x) const;  // (A + U V^T) x
  VectorXd apply_E(const VectorXd& x) const;
  VectorXd solve_E(const VectorXd& x);        // E^{-1} x
  VectorXd solve_coefficient(const VectorXd& x);  // (A + U V^T)^{-1} x

  const SpMat& A() const { return A_; }
  const SpMat& E() const { return E_; }
  Index n() const { return A_.rows(); }
  bool has_update() const { return U_.cols() > 0; }
  const MatrixXd& update_U() const { return U_; }
  const MatrixXd& update_V() const { return V_; }

  long solve_calls() const { return solve_calls_; }
  long factorizations() const { return factorizations_; }
  void set_cache_capacity(size_t cap);

 private:
  template <typename Scalar>
  struct Entry {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu;
    Mat FU;                             // lu^{-1} U
    Eigen::FullPivLU<Mat> capacitance;  // I + V^T lu^{-1} U
    long update_stamp = -1;             // which U/V the SMW data was built for
    long last_used = 0;
  };

  template <typename Scalar>
  Entry<Scalar>& entry_for(Complex alpha, std::map<std::pair<double, double>, std::unique_ptr<Entry<Scalar>>>& cache);
  template <typename Scalar>
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> solve_impl(
      Complex alpha, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& rhs,
      std::map<std::pair<double, double>, std::unique_ptr<Entry<Scalar>>>& cache);
  void evict_if_needed();

  SpMat A_, E_;
  MatrixXd U_, V_;
  long update_generation_ = 0;
  std::map<std::pair<double, double>, std::unique_ptr<Entry<double>>> real_cache_;
  std::map<std::pair<double, double>, std::unique_ptr<Entry<Complex>>> complex_cache_;
  std::unique_ptr<Eigen::SparseLU<SpMat>> e_lu_;
  size_t cache_capacity_ = 48;
  long clock_ = 0;
  long solve_calls_ = 0;
  long factorizations_ = 0;
};

}  // namespace lradi
