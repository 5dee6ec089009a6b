#pragma once

#include <vector>

#include "lradi/types.hpp"

namespace lradi::oracle {

// Dense desk-scale reference solvers. Everything here is deliberately naive and
// kept independent of the factored iteration code so it can arbitrate it.

MatrixXd kron(const MatrixXd& P, const MatrixXd& Q);

// A X E^T + E X A^T = -W via the vectorized n^2 x n^2 linear system.
// Trivially correct but O(n^6); capped at n <= 100 for memory.
MatrixXd dense_lyapunov_kron(const MatrixXd& A, const MatrixXd& E, const MatrixXd& W);

// Same equation through a complex eigendecomposition of E^{-1} A; O(n^3).
// Requires a diagonalizable pencil with a separated spectrum.
MatrixXd dense_lyapunov_eig(const MatrixXd& A, const MatrixXd& E, const MatrixXd& W);

// Dispatching solver: vectorized route at small orders, eigendecomposition route
// above, always followed by a self-residual check (<= 1e-10 relative).
MatrixXd dense_lyapunov(const MatrixXd& A, const MatrixXd& E, const MatrixXd& W);

// || A X E^T + E X A^T + W ||_F
double lyapunov_residual(const MatrixXd& A, const MatrixXd& E, const MatrixXd& W, const MatrixXd& X);

// || C^T C + A^T X E + E^T X A - E^T X B B^T X E ||_F
double riccati_residual(const MatrixXd& A, const MatrixXd& E, const MatrixXd& B, const MatrixXd& C,
                        const MatrixXd& X);

// Dense Newton iteration for C^T C + A^T X E + E^T X A - E^T X B B^T X E = 0
// from X = 0, exact inner solves, step halving on residual increase.
MatrixXd dense_are(const MatrixXd& A, const MatrixXd& E, const MatrixXd& B, const MatrixXd& C,
                   double reltol = 1e-12, int max_iters = 100);

// Classical fixed-step RK4 reference for the differential equation
//   E^T dX/dt E = C^T C + A^T X E + E^T X A - E^T X B B^T X E,  E^T X(t0) E = C^T C,
// returned on the uniform output grid t0 + i (tf - t0)/nout, i = 0..nout, with
// `substeps` internal RK4 steps per output interval.
std::vector<MatrixXd> dense_dre_reference(const MatrixXd& A, const MatrixXd& E, const MatrixXd& B,
                                          const MatrixXd& C, double t0, double tf, int nout,
                                          int substeps);

// finite eigenvalues of the pencil (A, E)
std::vector<Complex> generalized_spectrum(const MatrixXd& A, const MatrixXd& E);

// spectral radius of the rational function (lambda - conj(alpha)) / (lambda + alpha)
// over the pencil spectrum: the single-step error-reduction factor of shift alpha
double cayley_radius(const MatrixXd& A, const MatrixXd& E, Complex alpha);

// cumulative products of cayley_radius over a shift sequence; entry k covers shifts 0..k
std::vector<double> rho_hat_curve(const MatrixXd& A, const MatrixXd& E,
                                  const std::vector<Complex>& shifts);

}  // namespace lradi::oracle
