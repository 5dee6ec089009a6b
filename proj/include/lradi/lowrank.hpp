#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lradi/types.hpp"

namespace lradi {

// Symmetric (Hermitian) rank-structured representation
//
//   X = Z * Y * Z^H,   Z: n x z tall outer factor,  Y: z x z small inner factor.
//
// Y is Hermitian but in general indefinite. z == 0 is a first-class state and
// represents the zero matrix of order n; no operation may special-case it away.
template <typename Scalar>
struct LowRankFactorT {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Mat Z;  // n x z
  Mat Y;  // z x z

  static LowRankFactorT zero(Index n) {
    LowRankFactorT f;
    f.Z.resize(n, 0);
    f.Y.resize(0, 0);
    return f;
  }

  Index rows() const { return Z.rows(); }
  Index cols() const { return Z.cols(); }
  bool empty() const { return Z.cols() == 0; }

  void check() const {
    if (Z.cols() != Y.rows() || Y.rows() != Y.cols())
      throw structural_error("low-rank factor: inner factor must be square with order Z.cols()");
  }

  // dense reconstruction; for desk-scale diagnostics and tests only
  Mat materialize() const {
    check();
    if (empty()) return Mat::Zero(rows(), rows());
    return Z * Y * Z.adjoint();
  }
};

using LowRankFactor = LowRankFactorT<double>;
using LowRankFactorC = LowRankFactorT<Complex>;

// || Z Y Z^H ||_F without forming the product: an economy QR of Z gives
// || Z Y Z^H ||_F = || R Y R^H ||_F with a small triangular R; Q is never formed.
template <typename Scalar>
double frobenius_norm(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& Z,
                      const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& Y) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (Z.cols() != Y.rows() || Y.rows() != Y.cols())
    throw structural_error("frobenius_norm: inner factor must be square with order Z.cols()");
  if (Z.cols() == 0) return 0.0;
  Eigen::HouseholderQR<Mat> qr(Z);
  const Index k = std::min(Z.rows(), Z.cols());
  Mat R = Mat(qr.matrixQR().topRows(k)).template triangularView<Eigen::Upper>();
  return (R * Y * R.adjoint()).norm();
}

template <typename Scalar>
double frobenius_norm(const LowRankFactorT<Scalar>& f) {
  return frobenius_norm<Scalar>(f.Z, f.Y);
}

// Concatenating addition X1 + sign * X2: outer factors side by side, inner factors
// block diagonal. Cheap and exact; ranks add up, so pair with compress().
template <typename Scalar>
LowRankFactorT<Scalar> add(const LowRankFactorT<Scalar>& a, const LowRankFactorT<Scalar>& b,
                           double sign = 1.0) {
  a.check();
  b.check();
  if (a.rows() != b.rows()) throw structural_error("add: outer factors must have equal row counts");
  if (sign != 1.0 && sign != -1.0) throw structural_error("add: sign must be +1 or -1");
  LowRankFactorT<Scalar> out;
  out.Z.resize(a.rows(), a.cols() + b.cols());
  out.Z << a.Z, b.Z;
  out.Y = LowRankFactorT<Scalar>::Mat::Zero(out.Z.cols(), out.Z.cols());
  out.Y.topLeftCorner(a.cols(), a.cols()) = a.Y;
  out.Y.bottomRightCorner(b.cols(), b.cols()) = Scalar(sign) * b.Y;
  return out;
}

// X -> s * X, applied to the inner factor only
template <typename Scalar>
LowRankFactorT<Scalar> scaled(const LowRankFactorT<Scalar>& f, double s) {
  f.check();
  LowRankFactorT<Scalar> out;
  out.Z = f.Z;
  out.Y = Scalar(s) * f.Y;
  return out;
}

// Rank truncation. Orthonormalize Z (economy QR), eigendecompose the congruence
// R Y R^H, and keep eigenvalues with
//
//   |lambda| >= max{1, rho} * z * u,   rho = spectral radius of R Y R^H,
//
// where z is the incoming column count and u the unit roundoff. The result has
// an orthonormal outer factor and a real diagonal inner factor; columns never
// increase. A zero matrix truncates to the empty factor.
template <typename Scalar>
LowRankFactorT<Scalar> compress(const LowRankFactorT<Scalar>& f) {
  using Mat = typename LowRankFactorT<Scalar>::Mat;
  f.check();
  const Index n = f.rows(), z = f.cols();
  if (z == 0) return f;

  Eigen::HouseholderQR<Mat> qr(f.Z);
  const Index k = std::min(n, z);
  Mat R = Mat(qr.matrixQR().topRows(k)).template triangularView<Eigen::Upper>();
  Mat M = R * f.Y * R.adjoint();
  M = Scalar(0.5) * (M + Mat(M.adjoint()));  // re-hermitize against roundoff

  Eigen::SelfAdjointEigenSolver<Mat> eig(M);
  if (eig.info() != Eigen::Success) throw numerical_error("compress: eigendecomposition failed");
  const VectorXd lam = eig.eigenvalues();

  const double radius = lam.size() > 0 ? lam.cwiseAbs().maxCoeff() : 0.0;
  const double cutoff = std::max(1.0, radius) * static_cast<double>(z) * unit_roundoff;
  std::vector<Index> keep;
  for (Index i = 0; i < lam.size(); ++i)
    if (std::abs(lam[i]) >= cutoff) keep.push_back(i);

  Mat W(k, static_cast<Index>(keep.size()));
  LowRankFactorT<Scalar> out;
  out.Y = Mat::Zero(W.cols(), W.cols());
  for (Index j = 0; j < W.cols(); ++j) {
    W.col(j) = eig.eigenvectors().col(keep[static_cast<size_t>(j)]);
    out.Y(j, j) = Scalar(lam[keep[static_cast<size_t>(j)]]);
  }
  Mat Q = qr.householderQ() * Mat::Identity(n, k);
  out.Z = Q * W;
  return out;
}

// When an accumulated factored sum is due for truncation: after every 10
// concatenating additions, or as soon as the inner order reaches half the
// outer dimension.
bool compression_due(int additions_since_compress, Index z, Index n);

}  // namespace lradi
