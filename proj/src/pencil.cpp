#include "lradi/pencil.hpp"

#include <limits>

namespace lradi {

namespace {

template <typename Scalar>
Eigen::SparseMatrix<Scalar> shifted_matrix(const SpMat& A, const SpMat& E, Complex alpha);

template <>
Eigen::SparseMatrix<double> shifted_matrix<double>(const SpMat& A, const SpMat& E, Complex alpha) {
  if (alpha.real() == 0.0) return A;
  SpMat F = A + alpha.real() * E;
  return F;
}

template <>
Eigen::SparseMatrix<Complex> shifted_matrix<Complex>(const SpMat& A, const SpMat& E, Complex alpha) {
  SpMatC F = A.cast<Complex>() + alpha * E.cast<Complex>();
  return F;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> cast_real(const MatrixXd& M);

template <>
MatrixXd cast_real<double>(const MatrixXd& M) {
  return M;
}

template <>
MatrixXcd cast_real<Complex>(const MatrixXd& M) {
  return M.cast<Complex>();
}

}  // namespace

ShiftedSolver::ShiftedSolver(SpMat A, SpMat E) : A_(std::move(A)), E_(std::move(E)) {
  if (A_.rows() != A_.cols() || E_.rows() != A_.rows() || E_.cols() != A_.rows())
    throw structural_error("shifted solver: A and E must be square and of equal order");
  A_.makeCompressed();
  E_.makeCompressed();
  U_.resize(A_.rows(), 0);
  V_.resize(A_.rows(), 0);
}

ShiftedSolver::ShiftedSolver(const LyapunovProblem& p) : ShiftedSolver(p.A, p.E) {
  set_update(p.U, p.V);
}

void ShiftedSolver::set_update(const MatrixXd& U, const MatrixXd& V) {
  if (U.cols() != V.cols() || (U.cols() > 0 && (U.rows() != n() || V.rows() != n())))
    throw structural_error("shifted solver: low-rank correction factors must be n x p");
  U_ = U;
  V_ = V;
  ++update_generation_;
}

void ShiftedSolver::set_cache_capacity(size_t cap) {
  cache_capacity_ = cap == 0 ? 1 : cap;
  evict_if_needed();
}

void ShiftedSolver::evict_if_needed() {
  while (real_cache_.size() + complex_cache_.size() > cache_capacity_) {
    long best = std::numeric_limits<long>::max();
    const std::pair<double, double>* real_key = nullptr;
    const std::pair<double, double>* cplx_key = nullptr;
    for (const auto& [key, e] : real_cache_)
      if (e->last_used < best) {
        best = e->last_used;
        real_key = &key;
        cplx_key = nullptr;
      }
    for (const auto& [key, e] : complex_cache_)
      if (e->last_used < best) {
        best = e->last_used;
        cplx_key = &key;
        real_key = nullptr;
      }
    if (real_key)
      real_cache_.erase(*real_key);
    else if (cplx_key)
      complex_cache_.erase(*cplx_key);
    else
      break;
  }
}

template <typename Scalar>
ShiftedSolver::Entry<Scalar>& ShiftedSolver::entry_for(
    Complex alpha, std::map<std::pair<double, double>, std::unique_ptr<Entry<Scalar>>>& cache) {
  const std::pair<double, double> key{alpha.real(), alpha.imag()};
  auto it = cache.find(key);
  if (it == cache.end()) {
    auto entry = std::make_unique<Entry<Scalar>>();
    Eigen::SparseMatrix<Scalar> F = shifted_matrix<Scalar>(A_, E_, alpha);
    F.makeCompressed();
    entry->lu.compute(F);
    ++factorizations_;
    if (entry->lu.info() != Eigen::Success)
      throw singular_shift_error("shifted coefficient matrix is singular", alpha);
    // stamp before evicting so the entry we are about to use can never be the
    // least-recently-used victim
    entry->last_used = ++clock_;
    it = cache.emplace(key, std::move(entry)).first;
    evict_if_needed();
  }
  Entry<Scalar>& e = *it->second;
  e.last_used = ++clock_;
  if (U_.cols() > 0 && e.update_stamp != update_generation_) {
    using Mat = typename Entry<Scalar>::Mat;
    e.FU = e.lu.solve(cast_real<Scalar>(U_));
    Mat cap = Mat::Identity(U_.cols(), U_.cols());
    cap.noalias() += cast_real<Scalar>(V_).transpose() * e.FU;
    e.capacitance.compute(cap);
    if (!e.capacitance.isInvertible())
      throw singular_shift_error("low-rank correction makes the shifted coefficient singular", alpha);
    e.update_stamp = update_generation_;
  }
  return e;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> ShiftedSolver::solve_impl(
    Complex alpha, const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& rhs,
    std::map<std::pair<double, double>, std::unique_ptr<Entry<Scalar>>>& cache) {
  if (rhs.rows() != n()) throw structural_error("shifted solver: right-hand side has wrong row count");
  Entry<Scalar>& e = entry_for<Scalar>(alpha, cache);
  ++solve_calls_;
  using Mat = typename Entry<Scalar>::Mat;
  Mat X = e.lu.solve(rhs);
  if (U_.cols() > 0) {
    Mat VtX = cast_real<Scalar>(V_).transpose() * X;
    X.noalias() -= e.FU * e.capacitance.solve(VtX);
  }
  return X;
}

MatrixXd ShiftedSolver::solve(double alpha, const MatrixXd& rhs) {
  return solve_impl<double>(Complex(alpha, 0.0), rhs, real_cache_);
}

MatrixXcd ShiftedSolver::solve(Complex alpha, const MatrixXcd& rhs) {
  if (alpha.imag() == 0.0) {
    MatrixXcd out(rhs.rows(), rhs.cols());
    out.real() = solve(alpha.real(), MatrixXd(rhs.real()));
    out.imag() = solve(alpha.real(), MatrixXd(rhs.imag()));
    return out;
  }
  return solve_impl<Complex>(alpha, rhs, complex_cache_);
}

VectorXd ShiftedSolver::apply_coefficient(const VectorXd& x) const {
  VectorXd out = A_ * x;
  if (U_.cols() > 0) out.noalias() += U_ * (V_.transpose() * x);
  return out;
}

VectorXd ShiftedSolver::apply_E(const VectorXd& x) const { return E_ * x; }

VectorXd ShiftedSolver::solve_E(const VectorXd& x) {
  if (!e_lu_) {
    e_lu_ = std::make_unique<Eigen::SparseLU<SpMat>>();
    e_lu_->compute(E_);
    ++factorizations_;
    if (e_lu_->info() != Eigen::Success) throw numerical_error("mass matrix E is singular");
  }
  ++solve_calls_;
  return e_lu_->solve(x);
}

VectorXd ShiftedSolver::solve_coefficient(const VectorXd& x) {
  MatrixXd rhs = x;
  return solve_impl<double>(Complex(0.0, 0.0), rhs, real_cache_);
}

}  // namespace lradi
