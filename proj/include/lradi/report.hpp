#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "lradi/trace.hpp"
#include "lradi/types.hpp"

namespace lradi {

// Bumped whenever a column is added, removed, renamed, or reordered in any of
// the CSV layouts below; the value is stamped into every run manifest.
inline constexpr int csv_schema_version = 1;

std::string version_string();

// Iteration history of one equation solve: one row per recorded step plus a
// trailing "total" row with the aggregate timings and the final rank.
void write_lyap_trace_csv(const std::filesystem::path& file, const AdiTrace& trace);

// Per-step history of one Riccati solve, plus a trailing "total" row.
void write_newton_steps_csv(const std::filesystem::path& file, const NewtonTrace& trace);

// One sweep row compares two Riccati solves that differ only in how the inner
// solves start: "old" from zero, "new" from the current outer iterate. Rows for
// runs that hit the iteration cap keep their counters but leave the timing and
// speedup cells empty.
struct NewtonSweepRow {
  std::string mode;
  std::string line_search;
  std::string shifts;
  struct Cell {
    bool converged = false;
    int newton_steps = 0;
    long adi_steps = 0;
    long solves = 0;
    Index rank = 0;  // columns of the final solution factor
    double t_compress = 0.0, t_shifts = 0.0, t_solve = 0.0, t_total = 0.0;
  } old_init, new_init;
};
void write_newton_sweep_csv(const std::filesystem::path& file,
                            const std::vector<NewtonSweepRow>& rows);

// Differential equation runs: one summary row per configuration, and a
// per-step breakdown for a single run.
struct DreSummaryRow {
  int time_steps = 0;
  std::string shifts;
  std::string init;
  bool converged = false;
  int steps_completed = 0;
  long adi_iterations = 0;
  long solves = 0;
  Index max_solution_cols = 0;
  Index final_solution_cols = 0;
  double t_compress = 0.0, t_shifts = 0.0, t_solve = 0.0, t_total = 0.0;
};
void write_dre_summary_csv(const std::filesystem::path& file,
                           const std::vector<DreSummaryRow>& rows);
void write_dre_step_csv(const std::filesystem::path& file, const DreTrace& trace);

// Shift quality curves: per ordering and iteration the shift, its contraction
// radius over the candidate set, and the accumulated contraction product.
struct ShiftCurvePoint {
  std::string ordering;
  int k = 0;
  Complex shift;
  double radius = 0.0;
  double rho_hat = 0.0;
};
void write_shift_curves_csv(const std::filesystem::path& file,
                            const std::vector<ShiftCurvePoint>& points);

// Plain "key = value" manifest describing a run (tool version, schema version,
// configuration, seeds). Order of entries is preserved.
void write_run_manifest(const std::filesystem::path& file,
                        const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace lradi
