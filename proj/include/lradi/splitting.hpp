#pragma once

#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "lradi/types.hpp"

namespace lradi {

// One member of a (possibly nonstationary) matrix splitting A = M_k - N_k,
// given through its operator actions. The induced iteration for A x = b is
//
//   v^k = -M_k^{-1} r^k,   x^{k+1} = x^k + v^k,
//
// and when all members commute pairwise the residual r = A x - b obeys the same
// recursion as the error, so it can be propagated instead of recomputed.
template <typename Scalar>
struct OperatorSplitT {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  std::function<Vec(const Vec&)> apply_M;
  std::function<Vec(const Vec&)> apply_N;
  std::function<Vec(const Vec&)> solve_M;
};

using OperatorSplit = OperatorSplitT<double>;

template <typename Scalar>
struct CssIterateT {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vec x;  // current iterate
  Vec r;  // residual A x - b
  Vec v;  // most recent increment (zero before the first step)
  int k = 0;
};

using CssIterate = CssIterateT<double>;

// How the next residual is obtained: from the increment (r <- -N v) or by the
// one-sided recursion (r <- M^{-1} N r). Both are exact for commuting families.
enum class ResidualMode { via_increment, via_recursion };

// initial iterate; the residual is assembled through the split, r = M x0 - N x0 - b
template <typename Scalar>
CssIterateT<Scalar> make_css_iterate(const OperatorSplitT<Scalar>& split,
                                     const typename OperatorSplitT<Scalar>::Vec& x0,
                                     const typename OperatorSplitT<Scalar>::Vec& b) {
  if (x0.size() != b.size()) throw structural_error("splitting iterate: x0 and b sizes differ");
  CssIterateT<Scalar> it;
  it.x = x0;
  it.r = split.apply_M(x0) - split.apply_N(x0) - b;
  it.v = CssIterateT<Scalar>::Vec::Zero(x0.size());
  it.k = 0;
  return it;
}

template <typename Scalar>
CssIterateT<Scalar> css_step(const OperatorSplitT<Scalar>& split, const CssIterateT<Scalar>& it,
                             ResidualMode mode) {
  if (!split.apply_M || !split.apply_N || !split.solve_M)
    throw structural_error("splitting step: split must provide apply_M, apply_N, solve_M");
  CssIterateT<Scalar> out;
  out.v = -split.solve_M(it.r);
  out.x = it.x + out.v;
  out.r = mode == ResidualMode::via_increment ? typename CssIterateT<Scalar>::Vec(-split.apply_N(out.v))
                                              : typename CssIterateT<Scalar>::Vec(split.solve_M(split.apply_N(it.r)));
  out.k = it.k + 1;
  return out;
}

// Run the whole family once in the given order and in `permutations` seeded
// reshuffles; returns the largest deviation of the final iterates. Vanishes
// (up to roundoff) exactly when the family commutes pairwise.
template <typename Scalar>
double check_permutation_invariance(const std::vector<OperatorSplitT<Scalar>>& family,
                                    const typename OperatorSplitT<Scalar>::Vec& x0,
                                    const typename OperatorSplitT<Scalar>::Vec& b,
                                    std::uint64_t seed, int permutations = 5,
                                    ResidualMode mode = ResidualMode::via_increment) {
  if (family.empty()) throw structural_error("permutation check: family must be non-empty");
  const auto run = [&](const std::vector<size_t>& order) {
    CssIterateT<Scalar> it = make_css_iterate(family[order.front()], x0, b);
    for (const size_t idx : order) it = css_step(family[idx], it, mode);
    return it.x;
  };
  std::vector<size_t> order(family.size());
  std::iota(order.begin(), order.end(), size_t{0});
  const auto baseline = run(order);

  std::mt19937_64 rng(seed);
  double deviation = 0.0;
  for (int p = 0; p < permutations; ++p) {
    std::shuffle(order.begin(), order.end(), rng);
    deviation = std::max(deviation, (run(order) - baseline).norm());
  }
  return deviation;
}

}  // namespace lradi
