#include "lradi/oracle.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace lradi::oracle {

namespace {

void require_square_triplet(const MatrixXd& A, const MatrixXd& E, const MatrixXd& W) {
  const Index n = A.rows();
  if (A.cols() != n || E.rows() != n || E.cols() != n || W.rows() != n || W.cols() != n)
    throw structural_error("dense lyapunov: A, E, W must be square and of equal order");
}

MatrixXd symmetrized(const MatrixXd& X) { return 0.5 * (X + X.transpose()); }

}  // namespace

MatrixXd kron(const MatrixXd& P, const MatrixXd& Q) {
  MatrixXd K(P.rows() * Q.rows(), P.cols() * Q.cols());
  for (Index i = 0; i < P.rows(); ++i)
    for (Index j = 0; j < P.cols(); ++j)
      K.block(i * Q.rows(), j * Q.cols(), Q.rows(), Q.cols()) = P(i, j) * Q;
  return K;
}

MatrixXd dense_lyapunov_kron(const MatrixXd& A, const MatrixXd& E, const MatrixXd& W) {
  require_square_triplet(A, E, W);
  const Index n = A.rows();
  if (n > 100) throw structural_error("dense lyapunov: vectorized route is limited to n <= 100");
  if (n == 0) return MatrixXd(0, 0);
  // vec(A X E^T) = (E kron A) vec(X), vec(E X A^T) = (A kron E) vec(X)
  MatrixXd K = kron(E, A) + kron(A, E);
  VectorXd w = Eigen::Map<const VectorXd>(W.data(), n * n);
  Eigen::PartialPivLU<MatrixXd> lu(K);
  VectorXd x = lu.solve(-w);
  const double consistency = (K * x + w).norm();
  if (!(consistency <= 1e-8 * std::max(1.0, w.norm())))
    throw numerical_error("dense lyapunov: pencil does not admit a unique solution");
  MatrixXd X = Eigen::Map<const MatrixXd>(x.data(), n, n);
  return symmetrized(X);
}

MatrixXd dense_lyapunov_eig(const MatrixXd& A, const MatrixXd& E, const MatrixXd& W) {
  require_square_triplet(A, E, W);
  const Index n = A.rows();
  if (n == 0) return MatrixXd(0, 0);
  // multiply by E^{-1} from the left and E^{-T} from the right:
  //   F X + X F^T = -E^{-1} W E^{-T},  F = E^{-1} A
  Eigen::PartialPivLU<MatrixXd> luE(E);
  MatrixXd F = luE.solve(A);
  MatrixXd Wt = luE.solve(W);
  Wt = luE.solve(Wt.transpose()).transpose();

  Eigen::EigenSolver<MatrixXd> es(F);
  if (es.info() != Eigen::Success) throw numerical_error("dense lyapunov: eigendecomposition failed");
  const MatrixXcd V = es.eigenvectors();
  const VectorXcd lam = es.eigenvalues();

  Eigen::PartialPivLU<MatrixXcd> luV(V);
  MatrixXcd Cm = luV.solve(Wt.cast<Complex>());
  Cm = luV.solve(Cm.transpose()).transpose();  // V^{-1} Wt V^{-T} (plain transpose)

  MatrixXcd Xt(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      const Complex denom = lam[i] + lam[j];
      if (std::abs(denom) < 1e-14 * (std::abs(lam[i]) + std::abs(lam[j]) + 1.0))
        throw numerical_error("dense lyapunov: pencil spectrum is not separated from its mirror");
      Xt(i, j) = -Cm(i, j) / denom;
    }
  MatrixXd X = (V * Xt * V.transpose()).real();
  return symmetrized(X);
}

double lyapunov_residual(const MatrixXd& A, const MatrixXd& E, const MatrixXd& W, const MatrixXd& X) {
  return (A * X * E.transpose() + E * X * A.transpose() + W).norm();
}

MatrixXd dense_lyapunov(const MatrixXd& A, const MatrixXd& E, const MatrixXd& W) {
  require_square_triplet(A, E, W);
  const Index n = A.rows();
  if (n > 400) throw structural_error("dense lyapunov: limited to n <= 400");
  MatrixXd X = n <= 40 ? dense_lyapunov_kron(A, E, W) : dense_lyapunov_eig(A, E, W);
  const double scale = std::max(W.norm(), 1e-300);
  if (lyapunov_residual(A, E, W, X) > 1e-10 * scale) {
    if (n > 40 && n <= 100) {
      X = dense_lyapunov_kron(A, E, W);  // eigendecomposition route was too inaccurate
      if (lyapunov_residual(A, E, W, X) <= 1e-10 * scale) return X;
    }
    throw numerical_error("dense lyapunov: self-residual check failed");
  }
  return X;
}

double riccati_residual(const MatrixXd& A, const MatrixXd& E, const MatrixXd& B, const MatrixXd& C,
                        const MatrixXd& X) {
  const MatrixXd XE = X * E;
  const MatrixXd BtXE = B.transpose() * XE;
  return (C.transpose() * C + A.transpose() * XE + XE.transpose() * A - BtXE.transpose() * BtXE).norm();
}

MatrixXd dense_are(const MatrixXd& A, const MatrixXd& E, const MatrixXd& B, const MatrixXd& C,
                   double reltol, int max_iters) {
  const Index n = A.rows();
  if (A.cols() != n || E.rows() != n || E.cols() != n || B.rows() != n || C.cols() != n)
    throw structural_error("dense are: inconsistent dimensions");
  const MatrixXd CtC = C.transpose() * C;
  const double scale = std::max(CtC.norm(), 1e-300);

  MatrixXd X = MatrixXd::Zero(n, n);
  double res = riccati_residual(A, E, B, C, X);
  for (int it = 0; it < max_iters; ++it) {
    if (res <= reltol * scale) return symmetrized(X);
    const MatrixXd XE = X * E;
    const MatrixXd Al = A - B * (B.transpose() * XE);
    const MatrixXd W = CtC + XE.transpose() * B * (B.transpose() * XE);
    const MatrixXd Xn = dense_lyapunov(Al.transpose(), E.transpose(), W);
    // damped update: halve the step until the residual stops increasing
    MatrixXd Xbest = Xn;
    double rbest = riccati_residual(A, E, B, C, Xn);
    double lambda = 1.0;
    for (int h = 0; h < 40 && rbest > res; ++h) {
      lambda *= 0.5;
      const MatrixXd Xc = X + lambda * (Xn - X);
      const double rc = riccati_residual(A, E, B, C, Xc);
      if (rc < rbest) {
        rbest = rc;
        Xbest = Xc;
      }
    }
    X = Xbest;
    res = rbest;
  }
  if (res <= reltol * scale) return symmetrized(X);
  throw numerical_error("dense are: no convergence within the iteration budget");
}

std::vector<MatrixXd> dense_dre_reference(const MatrixXd& A, const MatrixXd& E, const MatrixXd& B,
                                          const MatrixXd& C, double t0, double tf, int nout,
                                          int substeps) {
  const Index n = A.rows();
  if (nout < 1 || substeps < 1) throw structural_error("dense dre: grid must be positive");
  if (A.cols() != n || E.rows() != n || E.cols() != n || B.rows() != n || C.cols() != n)
    throw structural_error("dense dre: inconsistent dimensions");

  // normalize to dX/dt = Q + K^T X + X K - X B B^T X with K = A E^{-1}
  Eigen::PartialPivLU<MatrixXd> luEt(MatrixXd(E.transpose()));
  const MatrixXd L = luEt.solve(C.transpose());  // E^{-T} C^T
  const MatrixXd Q = L * L.transpose();
  const MatrixXd K = luEt.solve(A.transpose()).transpose();
  const MatrixXd BBt = B * B.transpose();
  const auto f = [&](const MatrixXd& X) -> MatrixXd {
    return Q + K.transpose() * X + X * K - X * BBt * X;
  };

  std::vector<MatrixXd> out;
  out.reserve(static_cast<size_t>(nout) + 1);
  MatrixXd X = Q;  // E^T X(t0) E = C^T C
  out.push_back(X);
  const double h = (tf - t0) / (static_cast<double>(nout) * substeps);
  for (int i = 0; i < nout; ++i) {
    for (int s = 0; s < substeps; ++s) {
      const MatrixXd k1 = f(X);
      const MatrixXd k2 = f(X + 0.5 * h * k1);
      const MatrixXd k3 = f(X + 0.5 * h * k2);
      const MatrixXd k4 = f(X + h * k3);
      X += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      X = symmetrized(X);
    }
    out.push_back(X);
  }
  return out;
}

std::vector<Complex> generalized_spectrum(const MatrixXd& A, const MatrixXd& E) {
  if (A.rows() != A.cols() || E.rows() != A.rows() || E.cols() != A.rows())
    throw structural_error("generalized spectrum: A and E must be square and of equal order");
  Eigen::GeneralizedEigenSolver<MatrixXd> ges(A, E, false);
  if (ges.info() != Eigen::Success) throw numerical_error("generalized spectrum: QZ iteration failed");
  std::vector<Complex> out;
  for (Index i = 0; i < A.rows(); ++i) {
    const Complex a = ges.alphas()[i];
    const double b = ges.betas()[i];
    if (std::abs(b) > 1e-14 * std::max(1.0, std::abs(a))) out.push_back(a / b);
  }
  return out;
}

double cayley_radius(const MatrixXd& A, const MatrixXd& E, Complex alpha) {
  const auto spectrum = generalized_spectrum(A, E);
  double radius = 0.0;
  for (const Complex lam : spectrum)
    radius = std::max(radius, std::abs(lam - std::conj(alpha)) / std::abs(lam + alpha));
  return radius;
}

std::vector<double> rho_hat_curve(const MatrixXd& A, const MatrixXd& E,
                                  const std::vector<Complex>& shifts) {
  const auto spectrum = generalized_spectrum(A, E);
  std::vector<double> out;
  out.reserve(shifts.size());
  double acc = 1.0;
  for (const Complex alpha : shifts) {
    double radius = 0.0;
    for (const Complex lam : spectrum)
      radius = std::max(radius, std::abs(lam - std::conj(alpha)) / std::abs(lam + alpha));
    acc *= radius;
    out.push_back(acc);
  }
  return out;
}

}  // namespace lradi::oracle
