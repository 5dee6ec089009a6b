#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lradi/pencil.hpp"
#include "lradi/types.hpp"

namespace lradi {

// Shift parameters drive the alternating solves; every shift must be strictly
// stable (negative real part), and non-real shifts travel as adjacent conjugate
// pairs (the +Im member first) so a paired step can consume both at once.
struct ShiftSequence {
  std::vector<Complex> values;
  std::string origin;  // human-readable provenance for run manifests
  void validate() const;
};

enum class ShiftOrder { heuristic, decreasing, increasing };

ShiftOrder parse_shift_order(const std::string& name);
std::string to_string(ShiftOrder order);

// Plain single-pass Arnoldi for rough Ritz values of the operator given by
// `apply` on a seeded random start vector. No reorthogonalization, no restarts:
// the consumers want cheap, coarse spectral estimates, and empirically the shift
// heuristics work better with them than with sharpened eigenvalues.
std::vector<Complex> arnoldi_ritz(const std::function<VectorXd(const VectorXd&)>& apply, Index n,
                                  int steps, std::uint64_t seed);

// Greedy min-max selection of `count` shifts out of a stable candidate pool:
// the first shift minimizes (over candidates) the worst rational reduction
// factor max |lambda - conj(alpha)| / |lambda + alpha| over the pool; each
// following shift is the still-unchosen candidate where the product
// prod_i |t - alpha_i| / |t + alpha_i| over the chosen set is largest, i.e. the
// candidate the current set covers worst. Conjugates are pulled in adjacently,
// so the result may exceed `count` by one. With count >= pool size this is a
// permutation of the pool.
std::vector<Complex> penzl_select(const std::vector<Complex>& candidates, int count);

// Order a conjugation-closed value set by real part (pairs move as units,
// secondary key |Im|, the +Im member first). The heuristic order delegates to
// penzl_select over the whole set.
std::vector<Complex> sort_conjugate_adjacent(const std::vector<Complex>& values, ShiftOrder order);

// Candidate pool for the classic heuristic: `steps_plus` Arnoldi steps of
// E^{-1} F unioned with reciprocal Ritz values from `steps_minus` steps of
// F^{-1} E (F being the corrected coefficient); unstable candidates discarded.
ShiftSequence heuristic_shifts(ShiftedSolver& ops, int count, int steps_plus, int steps_minus,
                               std::uint64_t seed);

// Finite eigenvalues of the pencil compressed onto an orthonormalized span of
// `basis` (rank-revealing QR; rank-deficient input is fine).
std::vector<Complex> projected_pencil_eigenvalues(ShiftedSolver& ops, const MatrixXd& basis);

// What a shift provider may inspect when (re)generating inside a solve.
struct ShiftContext {
  ShiftedSolver& ops;
  const MatrixXd& residual_factor;
  const std::deque<MatrixXd>& recent_increments;  // newest last
};

class ShiftProvider {
 public:
  virtual ~ShiftProvider() = default;
  // Next shift to apply. A non-real return value implicitly consumes the
  // adjacent conjugate as well; the caller performs one paired step for both.
  virtual Complex next(const ShiftContext& ctx) = 0;
  virtual std::string describe() const = 0;
};

// fixed list, repeated cyclically
class CyclicShiftProvider : public ShiftProvider {
 public:
  explicit CyclicShiftProvider(ShiftSequence seq);
  Complex next(const ShiftContext& ctx) override;
  std::string describe() const override { return seq_.origin; }

 private:
  ShiftSequence seq_;
  size_t pos_ = 0;
};

// heuristic pool computed once from the pencil on first use, then cyclic
class PenzlShiftProvider : public ShiftProvider {
 public:
  PenzlShiftProvider(int count, int steps_plus, int steps_minus, std::uint64_t seed);
  Complex next(const ShiftContext& ctx) override;
  std::string describe() const override;
  const ShiftSequence& sequence() const { return seq_; }  // empty until first use

 private:
  int count_, steps_plus_, steps_minus_;
  std::uint64_t seed_;
  bool computed_ = false;
  ShiftSequence seq_;
  size_t pos_ = 0;
};

// Self-generating strategy: whenever the list is exhausted, project the pencil
// onto the last `window` increment blocks (the current residual factor before
// any step exists) and take the stable projected eigenvalues in the requested
// order. Falls back to the previous list if the projection yields nothing stable.
class ProjectionShiftProvider : public ShiftProvider {
 public:
  ProjectionShiftProvider(ShiftOrder order, int window = 2);
  Complex next(const ShiftContext& ctx) override;
  std::string describe() const override;
  int regenerations() const { return regenerations_; }

 private:
  void regenerate(const ShiftContext& ctx);
  ShiftOrder order_;
  int window_;
  std::vector<Complex> list_;
  size_t pos_ = 0;
  int regenerations_ = 0;
};

// Declarative strategy choice shared by the drivers and the command line,
// parseable from "heur:<count>,<steps+>,<steps->" or "proj:<heur|decr|incr>:<window>".
struct ShiftStrategy {
  enum class Kind { heuristic, projection };
  Kind kind = Kind::heuristic;
  int count = 10, steps_plus = 10, steps_minus = 10;  // heuristic pool parameters
  ShiftOrder order = ShiftOrder::heuristic;           // projection ordering
  int window = 2;                                     // projection basis width (blocks)
  std::uint64_t seed = 0;

  static ShiftStrategy parse(const std::string& text);
  std::string describe() const;
  std::unique_ptr<ShiftProvider> make_provider(std::uint64_t seed_offset = 0) const;
};

}  // namespace lradi
