#include "lradi/shifts.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "lradi/oracle.hpp"

namespace lradi {

namespace {

bool finite(Complex v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

struct ShiftUnit {
  Complex rep;  // the +Im member for a pair
  bool is_pair;
};

// Group a conjugation-closed multiset into reals and exact conjugate pairs.
std::vector<ShiftUnit> pair_units(const std::vector<Complex>& values) {
  std::vector<ShiftUnit> units;
  std::vector<char> used(values.size(), 0);
  for (size_t i = 0; i < values.size(); ++i) {
    if (used[i]) continue;
    used[i] = 1;
    const Complex v = values[i];
    if (v.imag() == 0.0) {
      units.push_back({v, false});
      continue;
    }
    size_t best = values.size();
    double best_dist = std::numeric_limits<double>::infinity();
    for (size_t j = i + 1; j < values.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(values[j] - std::conj(v));
      if (d < best_dist) {
        best_dist = d;
        best = j;
      }
    }
    if (best == values.size() || best_dist > 1e-10 * std::max(1.0, std::abs(v)))
      throw structural_error("shift values are not closed under conjugation");
    used[best] = 1;
    Complex canon = 0.5 * (v + std::conj(values[best]));
    if (canon.imag() < 0) canon = std::conj(canon);
    units.push_back({canon, true});
  }
  return units;
}

void append_unit(std::vector<Complex>& out, const ShiftUnit& u) {
  out.push_back(u.rep);
  if (u.is_pair) out.push_back(std::conj(u.rep));
}

}  // namespace

void ShiftSequence::validate() const {
  for (size_t i = 0; i < values.size(); ++i) {
    const Complex v = values[i];
    if (!finite(v) || !(v.real() < 0.0))
      throw structural_error("shift sequence: all shifts must be finite with negative real part");
    if (v.imag() == 0.0) continue;
    if (v.imag() < 0.0)
      throw structural_error("shift sequence: conjugate pairs must lead with the +Im member");
    if (i + 1 >= values.size() ||
        std::abs(values[i + 1] - std::conj(v)) > 1e-12 * (1.0 + std::abs(v)))
      throw structural_error("shift sequence: non-real shift lacks its adjacent conjugate");
    ++i;
  }
}

ShiftOrder parse_shift_order(const std::string& name) {
  if (name == "heur" || name == "heuristic") return ShiftOrder::heuristic;
  if (name == "decr" || name == "decreasing") return ShiftOrder::decreasing;
  if (name == "incr" || name == "increasing") return ShiftOrder::increasing;
  throw structural_error("unknown shift ordering: " + name);
}

std::string to_string(ShiftOrder order) {
  switch (order) {
    case ShiftOrder::heuristic: return "heur";
    case ShiftOrder::decreasing: return "decr";
    case ShiftOrder::increasing: return "incr";
  }
  return "?";
}

std::vector<Complex> arnoldi_ritz(const std::function<VectorXd(const VectorXd&)>& apply, Index n,
                                  int steps, std::uint64_t seed) {
  if (n < 1) throw structural_error("arnoldi: operator dimension must be positive");
  if (steps < 1 || static_cast<Index>(steps) > n)
    throw structural_error("arnoldi: step count must lie in [1, n]");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = gauss(rng);
  v.normalize();

  MatrixXd V(n, steps + 1);
  V.col(0) = v;
  MatrixXd H = MatrixXd::Zero(steps + 1, steps);
  Index m = steps;
  double scale = 1e-300;
  for (Index j = 0; j < steps; ++j) {
    VectorXd w = apply(V.col(j));
    for (Index i = 0; i <= j; ++i) {  // single modified Gram-Schmidt pass
      H(i, j) = V.col(i).dot(w);
      w -= H(i, j) * V.col(i);
    }
    H(j + 1, j) = w.norm();
    scale = std::max(scale, H.col(j).norm());
    if (H(j + 1, j) <= 1e-12 * scale) {  // happy breakdown: the Krylov space closed early
      m = j + 1;
      break;
    }
    V.col(j + 1) = w / H(j + 1, j);
  }

  Eigen::EigenSolver<MatrixXd> es(H.topLeftCorner(m, m));
  if (es.info() != Eigen::Success) throw numerical_error("arnoldi: Ritz value computation failed");
  std::vector<Complex> out(static_cast<size_t>(m));
  for (Index i = 0; i < m; ++i) out[static_cast<size_t>(i)] = es.eigenvalues()[i];
  return out;
}

std::vector<Complex> penzl_select(const std::vector<Complex>& candidates, int count) {
  if (candidates.empty()) throw structural_error("shift selection: empty candidate set");
  if (count < 1) throw structural_error("shift selection: requested count must be positive");
  for (const Complex v : candidates)
    if (!finite(v) || !(v.real() < 0.0))
      throw structural_error("shift selection: candidates must be finite and strictly stable");

  const auto units = pair_units(candidates);
  std::vector<Complex> pool;  // full value set, used for the coverage measures
  for (const auto& u : units) append_unit(pool, u);

  // first shift: best worst-case single-shift reduction factor over the pool
  size_t first = 0;
  double first_score = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < units.size(); ++i) {
    const Complex a = units[i].rep;
    double worst = 0.0;
    for (const Complex t : pool) worst = std::max(worst, std::abs(t - std::conj(a)) / std::abs(t + a));
    if (worst < first_score) {
      first_score = worst;
      first = i;
    }
  }

  std::vector<Complex> chosen;
  std::vector<char> used(units.size(), 0);
  used[first] = 1;
  append_unit(chosen, units[first]);

  // greedily add the candidate the chosen set covers worst
  while (static_cast<int>(chosen.size()) < count) {
    double best_score = -1.0;
    size_t best = units.size();
    for (size_t i = 0; i < units.size(); ++i) {
      if (used[i]) continue;
      const Complex t = units[i].rep;
      double s = 1.0;
      for (const Complex a : chosen) s *= std::abs(t - a) / std::abs(t + a);
      if (s > best_score) {
        best_score = s;
        best = i;
      }
    }
    if (best == units.size()) break;  // pool exhausted
    used[best] = 1;
    append_unit(chosen, units[best]);
  }
  return chosen;
}

std::vector<Complex> sort_conjugate_adjacent(const std::vector<Complex>& values, ShiftOrder order) {
  if (order == ShiftOrder::heuristic)
    return penzl_select(values, static_cast<int>(values.size()));
  auto units = pair_units(values);
  const bool ascending = order == ShiftOrder::increasing;
  std::stable_sort(units.begin(), units.end(), [&](const ShiftUnit& a, const ShiftUnit& b) {
    if (a.rep.real() != b.rep.real())
      return ascending ? a.rep.real() < b.rep.real() : a.rep.real() > b.rep.real();
    return std::abs(a.rep.imag()) < std::abs(b.rep.imag());
  });
  std::vector<Complex> out;
  out.reserve(values.size());
  for (const auto& u : units) append_unit(out, u);
  return out;
}

ShiftSequence heuristic_shifts(ShiftedSolver& ops, int count, int steps_plus, int steps_minus,
                               std::uint64_t seed) {
  if (count < 1 || steps_plus < 1 || steps_minus < 1)
    throw structural_error("heuristic shifts: counts must be positive");
  const Index n = ops.n();
  const int sp = static_cast<int>(std::min<Index>(steps_plus, n));
  const int sm = static_cast<int>(std::min<Index>(steps_minus, n));

  std::vector<Complex> cands;
  for (const Complex v : arnoldi_ritz(
           [&](const VectorXd& x) { return ops.solve_E(ops.apply_coefficient(x)); }, n, sp, seed))
    cands.push_back(v);
  // large-magnitude end of the spectrum: reciprocals of Ritz values of the inverse operator
  for (const Complex v : arnoldi_ritz(
           [&](const VectorXd& x) { return ops.solve_coefficient(ops.apply_E(x)); }, n, sm,
           seed ^ 0x9e3779b97f4a7c15ull))
    if (std::abs(v) > 1e-300) cands.push_back(1.0 / v);

  std::vector<Complex> stable;
  for (const Complex v : cands)
    if (finite(v) && v.real() < 0.0) stable.push_back(v);
  if (stable.empty())
    throw numerical_error("heuristic shifts: spectral sweeps produced no stable candidates");

  ShiftSequence seq;
  seq.values = penzl_select(stable, count);
  seq.origin = "heur:" + std::to_string(count) + "," + std::to_string(steps_plus) + "," +
               std::to_string(steps_minus);
  return seq;
}

std::vector<Complex> projected_pencil_eigenvalues(ShiftedSolver& ops, const MatrixXd& basis) {
  if (basis.rows() != ops.n() || basis.cols() == 0)
    throw structural_error("projected eigenvalues: basis must be n x s with s >= 1");
  Eigen::ColPivHouseholderQR<MatrixXd> qr(basis);
  const Index r = qr.rank();
  if (r == 0) return {};
  MatrixXd Q = qr.householderQ() * MatrixXd::Identity(basis.rows(), r);
  MatrixXd AQ = ops.A() * Q;
  if (ops.has_update()) AQ.noalias() += ops.update_U() * (ops.update_V().transpose() * Q);
  const MatrixXd Ap = Q.transpose() * AQ;
  const MatrixXd Ep = Q.transpose() * (ops.E() * Q);
  return oracle::generalized_spectrum(Ap, Ep);
}

CyclicShiftProvider::CyclicShiftProvider(ShiftSequence seq) : seq_(std::move(seq)) {
  seq_.validate();
  if (seq_.values.empty()) throw structural_error("cyclic shifts: sequence must be non-empty");
  for (size_t i = 0; i + 1 < seq_.values.size(); ++i)  // make pairs exactly conjugate
    if (seq_.values[i].imag() > 0.0) seq_.values[i + 1] = std::conj(seq_.values[i]);
}

Complex CyclicShiftProvider::next(const ShiftContext&) {
  const Complex a = seq_.values[pos_];
  pos_ += a.imag() != 0.0 ? 2 : 1;
  if (pos_ >= seq_.values.size()) pos_ = 0;
  return a;
}

PenzlShiftProvider::PenzlShiftProvider(int count, int steps_plus, int steps_minus,
                                       std::uint64_t seed)
    : count_(count), steps_plus_(steps_plus), steps_minus_(steps_minus), seed_(seed) {
  if (count < 1 || steps_plus < 1 || steps_minus < 1)
    throw structural_error("heuristic shifts: counts must be positive");
}

Complex PenzlShiftProvider::next(const ShiftContext& ctx) {
  if (!computed_) {
    seq_ = heuristic_shifts(ctx.ops, count_, steps_plus_, steps_minus_, seed_);
    computed_ = true;
    pos_ = 0;
  }
  const Complex a = seq_.values[pos_];
  pos_ += a.imag() != 0.0 ? 2 : 1;
  if (pos_ >= seq_.values.size()) pos_ = 0;
  return a;
}

std::string PenzlShiftProvider::describe() const {
  return "heur:" + std::to_string(count_) + "," + std::to_string(steps_plus_) + "," +
         std::to_string(steps_minus_);
}

ProjectionShiftProvider::ProjectionShiftProvider(ShiftOrder order, int window)
    : order_(order), window_(window) {
  if (window < 1) throw structural_error("projection shifts: window must be positive");
}

void ProjectionShiftProvider::regenerate(const ShiftContext& ctx) {
  MatrixXd basis;
  if (ctx.recent_increments.empty()) {
    basis = ctx.residual_factor;
  } else {
    const size_t take = std::min<size_t>(static_cast<size_t>(window_), ctx.recent_increments.size());
    Index cols = 0;
    for (size_t i = ctx.recent_increments.size() - take; i < ctx.recent_increments.size(); ++i)
      cols += ctx.recent_increments[i].cols();
    basis.resize(ctx.ops.n(), cols);
    Index at = 0;
    for (size_t i = ctx.recent_increments.size() - take; i < ctx.recent_increments.size(); ++i) {
      basis.middleCols(at, ctx.recent_increments[i].cols()) = ctx.recent_increments[i];
      at += ctx.recent_increments[i].cols();
    }
  }

  std::vector<Complex> stable;
  for (const Complex v : projected_pencil_eigenvalues(ctx.ops, basis))
    if (finite(v) && v.real() < 0.0) stable.push_back(v);

  ++regenerations_;
  if (stable.empty()) {
    if (list_.empty())
      throw numerical_error("projection shifts: no stable projected eigenvalues to start from");
    pos_ = 0;  // keep the previous list
    return;
  }
  list_ = order_ == ShiftOrder::heuristic ? penzl_select(stable, static_cast<int>(stable.size()))
                                          : sort_conjugate_adjacent(stable, order_);
  pos_ = 0;
}

Complex ProjectionShiftProvider::next(const ShiftContext& ctx) {
  if (pos_ >= list_.size()) regenerate(ctx);
  const Complex a = list_[pos_];
  pos_ += a.imag() != 0.0 ? 2 : 1;
  return a;
}

std::string ProjectionShiftProvider::describe() const {
  return "proj:" + to_string(order_) + ":" + std::to_string(window_);
}

ShiftStrategy ShiftStrategy::parse(const std::string& text) {
  ShiftStrategy s;
  const auto fail = [&]() {
    throw structural_error("unrecognized shift strategy '" + text +
                           "' (expected heur:<count>,<steps+>,<steps-> or proj:<heur|decr|incr>:<window>)");
  };
  const size_t colon = text.find(':');
  if (colon == std::string::npos) fail();
  const std::string kind = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  try {
    if (kind == "heur") {
      s.kind = Kind::heuristic;
      size_t c1 = rest.find(','), c2 = rest.find(',', c1 + 1);
      if (c1 == std::string::npos || c2 == std::string::npos) fail();
      s.count = std::stoi(rest.substr(0, c1));
      s.steps_plus = std::stoi(rest.substr(c1 + 1, c2 - c1 - 1));
      s.steps_minus = std::stoi(rest.substr(c2 + 1));
      if (s.count < 1 || s.steps_plus < 1 || s.steps_minus < 1) fail();
    } else if (kind == "proj") {
      s.kind = Kind::projection;
      const size_t c = rest.find(':');
      if (c == std::string::npos) fail();
      s.order = parse_shift_order(rest.substr(0, c));
      s.window = std::stoi(rest.substr(c + 1));
      if (s.window < 1) fail();
    } else {
      fail();
    }
  } catch (const std::invalid_argument&) {
    fail();
  } catch (const std::out_of_range&) {
    fail();
  }
  return s;
}

std::string ShiftStrategy::describe() const {
  if (kind == Kind::heuristic)
    return "heur:" + std::to_string(count) + "," + std::to_string(steps_plus) + "," +
           std::to_string(steps_minus);
  return "proj:" + to_string(order) + ":" + std::to_string(window);
}

std::unique_ptr<ShiftProvider> ShiftStrategy::make_provider(std::uint64_t seed_offset) const {
  if (kind == Kind::heuristic)
    return std::make_unique<PenzlShiftProvider>(count, steps_plus, steps_minus, seed + seed_offset);
  return std::make_unique<ProjectionShiftProvider>(order, window);
}

}  // namespace lradi
