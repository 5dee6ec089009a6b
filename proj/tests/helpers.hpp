#pragma once

// shared builders for the unit suites

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include "lradi/lowrank.hpp"
#include "lradi/problem.hpp"
#include "lradi/problems.hpp"

namespace testutil {

using namespace lradi;

// self-cleaning scratch directory for file-based tests
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static std::atomic<unsigned> counter{0};
    path = std::filesystem::temp_directory_path() /
           ("lradi_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  operator const std::filesystem::path&() const { return path; }
};

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline MatrixXd random_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXd M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) M(i, j) = g(gen);
  return M;
}

inline MatrixXd random_symmetric(Index n, std::uint64_t seed) {
  MatrixXd M = random_matrix(n, n, seed);
  return 0.5 * (M + M.transpose());
}

// dense stable test matrix: symmetric part pushed well into the left half-plane
inline MatrixXd random_stable(Index n, std::uint64_t seed) {
  MatrixXd M = random_matrix(n, n, seed);
  return M - (M.cwiseAbs().rowwise().sum().maxCoeff() + 1.0) * MatrixXd::Identity(n, n);
}

inline SpMat sparse_of(const MatrixXd& M) {
  SpMat S = M.sparseView();
  S.makeCompressed();
  return S;
}

inline SpMat speye(Index n) {
  SpMat I(n, n);
  I.setIdentity();
  return I;
}

inline LowRankFactor random_factor(Index n, Index z, std::uint64_t seed) {
  LowRankFactor f;
  f.Z = random_matrix(n, z, seed);
  f.Y = random_symmetric(z, seed ^ 0x5851f42d4c957f2dull);
  return f;
}

// Lyapunov problem A X E^T + E X A^T = -G S G^T without low-rank correction
inline LyapunovProblem lyap_problem(SpMat A, SpMat E, MatrixXd G, MatrixXd S) {
  LyapunovProblem p;
  p.A = std::move(A);
  p.E = std::move(E);
  p.G = std::move(G);
  p.S = std::move(S);
  p.U.resize(p.A.rows(), 0);
  p.V.resize(p.A.rows(), 0);
  return p;
}

inline LyapunovProblem heat_lyap(int grid, int dim, int g_cols, std::uint64_t seed,
                                 bool lumped = false) {
  HeatProblemOptions opt;
  opt.grid = grid;
  opt.dim = dim;
  opt.inputs = g_cols;
  opt.outputs = 1;
  opt.seed = seed;
  opt.mass = lumped ? HeatProblemOptions::Mass::lumped : HeatProblemOptions::Mass::identity;
  const GeneratedProblem gp = generate_heat_problem(opt);
  return lyap_problem(gp.A, gp.E, gp.B, MatrixXd::Identity(g_cols, g_cols));
}

inline MatrixXd rhs_dense(const LyapunovProblem& p) { return p.G * p.S * p.G.transpose(); }

inline double rel_err(const MatrixXd& got, const MatrixXd& want) {
  const double scale = want.norm();
  return (got - want).norm() / (scale > 0 ? scale : 1.0);
}

}  // namespace testutil
