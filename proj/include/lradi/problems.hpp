#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "lradi/problem.hpp"

namespace lradi {

// Finite-difference heat-equation test problems on the unit interval/square:
// Dirichlet Laplacian on `grid` interior points per dimension (diagonal entries
// -2 d (grid+1)^2), input matrix of scaled indicator columns and output matrix
// of indicator rows at seeded node positions, mass matrix either the identity
// or a seeded SPD diagonal standing in for a lumped mass.
struct HeatProblemOptions {
  int grid = 10;
  int dim = 1;  // 1 or 2; the order is grid^dim
  int inputs = 1;
  int outputs = 1;
  double beta = 1.0;  // scaling of the input columns
  enum class Mass { identity, lumped } mass = Mass::identity;
  std::uint64_t seed = 0;
  void validate() const;
};

struct GeneratedProblem {
  SpMat A, E;
  MatrixXd B, C;
  bool identity_E = true;
  std::map<std::string, std::string> metadata;

  Index n() const { return A.rows(); }
  RiccatiProblem riccati() const { return RiccatiProblem{A, E, B, C}; }
};

// Deterministic under the seed; the pencil is verified stable (dense check) up
// to order 400 at generation time.
GeneratedProblem generate_heat_problem(const HeatProblemOptions& opt);

// matrix market exchange files; values carry 17 significant digits so binary64
// round-trips exactly
void write_matrix_market(const std::filesystem::path& file, const SpMat& M);
void write_matrix_market(const std::filesystem::path& file, const MatrixXd& M);
SpMat read_matrix_market_sparse(const std::filesystem::path& file);
MatrixXd read_matrix_market_dense(const std::filesystem::path& file);

// A problem bundle is a directory with the matrix files plus a line-oriented
// `problem.manifest` ("key = value") naming them and the generation parameters
// (n, m, q, beta, seed, files.A/B/C and optionally files.E; absent E means
// identity mass).
void write_problem_bundle(const std::filesystem::path& dir, const GeneratedProblem& p);
GeneratedProblem read_problem_bundle(const std::filesystem::path& dir);

}  // namespace lradi
