#include "lradi/report.hpp"

#include <cstdio>
#include <fstream>

namespace lradi {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// quote a text field if it needs it (RFC 4180 style)
std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (const char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  q += '"';
  return q;
}

std::ofstream open_out(const std::filesystem::path& file) {
  std::error_code ec;  // ignored: a failed mkdir surfaces as the open failing below
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path(), ec);
  std::ofstream out(file);
  if (!out.good()) throw structural_error("cannot open " + file.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& file) {
  out.flush();
  if (!out.good()) throw structural_error("write failed for " + file.string());
}

}  // namespace

std::string version_string() { return "lradi 0.1.0"; }

void write_lyap_trace_csv(const std::filesystem::path& file, const AdiTrace& trace) {
  std::ofstream out = open_out(file);
  out << "k,lyap_residual_norm,residual_columns,cumulative_solves,"
         "t_compress,t_shifts,t_solve,t_total\n";
  for (const AdiIterationRecord& r : trace.rows)
    out << r.k << ',' << fmt17(r.residual_norm) << ',' << r.residual_cols << ','
        << r.cumulative_solves << ',' << fmt17(r.t_compress) << ',' << fmt17(r.t_shifts) << ','
        << fmt17(r.t_solve) << ',' << fmt17(r.t_total) << '\n';
  out << "total," << fmt17(trace.final_residual) << ',' << trace.solution_cols << ','
      << trace.solves << ',' << fmt17(trace.t_compress) << ',' << fmt17(trace.t_shifts) << ','
      << fmt17(trace.t_solve) << ',' << fmt17(trace.t_total) << '\n';
  finish(out, file);
}

void write_newton_steps_csv(const std::filesystem::path& file, const NewtonTrace& trace) {
  std::ofstream out = open_out(file);
  out << "step,riccati_residual,inner_tolerance,adi_iterations,adi_solves,"
         "line_search_lambda,solution_columns,t_compress,t_shifts,t_solve,t_total\n";
  for (const NewtonStepRecord& r : trace.steps)
    out << r.step << ',' << fmt17(r.residual) << ',' << fmt17(r.inner_tolerance) << ','
        << r.adi_iterations << ',' << r.adi_solves << ',' << fmt17(r.line_search_lambda) << ','
        << r.iterate_cols << ',' << fmt17(r.t_compress) << ',' << fmt17(r.t_shifts) << ','
        << fmt17(r.t_solve) << ',' << fmt17(r.t_total) << '\n';
  out << "total," << fmt17(trace.final_residual) << ",," << trace.total_adi_iterations << ','
      << trace.total_solves << ",,," << fmt17(trace.t_compress) << ',' << fmt17(trace.t_shifts)
      << ',' << fmt17(trace.t_solve) << ',' << fmt17(trace.t_total) << '\n';
  finish(out, file);
}

namespace {

// a pair of cells for one metric, old first
template <typename T>
void pair_cols(std::ofstream& out, const T& a, const T& b) {
  out << ',' << a << ',' << b;
}

void timing_pair(std::ofstream& out, const NewtonSweepRow& row, double NewtonSweepRow::Cell::*m) {
  out << ',';
  if (row.old_init.converged) out << fmt17(row.old_init.*m);
  out << ',';
  if (row.new_init.converged) out << fmt17(row.new_init.*m);
}

}  // namespace

void write_newton_sweep_csv(const std::filesystem::path& file,
                            const std::vector<NewtonSweepRow>& rows) {
  std::ofstream out = open_out(file);
  out << "mode,line_search,shifts,status_old,status_new,"
         "newton_steps_old,newton_steps_new,adi_steps_old,adi_steps_new,"
         "rank_old,rank_new,solves_old,solves_new,"
         "t_compress_old,t_compress_new,t_shifts_old,t_shifts_new,"
         "t_solve_old,t_solve_new,t_total_old,t_total_new,speedup\n";
  for (const NewtonSweepRow& row : rows) {
    const auto status = [](const NewtonSweepRow::Cell& c) {
      return c.converged ? "converged" : "max-iterations";
    };
    out << csv_field(row.mode) << ',' << csv_field(row.line_search) << ','
        << csv_field(row.shifts);
    pair_cols(out, status(row.old_init), status(row.new_init));
    pair_cols(out, row.old_init.newton_steps, row.new_init.newton_steps);
    pair_cols(out, row.old_init.adi_steps, row.new_init.adi_steps);
    pair_cols(out, row.old_init.rank, row.new_init.rank);
    pair_cols(out, row.old_init.solves, row.new_init.solves);
    timing_pair(out, row, &NewtonSweepRow::Cell::t_compress);
    timing_pair(out, row, &NewtonSweepRow::Cell::t_shifts);
    timing_pair(out, row, &NewtonSweepRow::Cell::t_solve);
    timing_pair(out, row, &NewtonSweepRow::Cell::t_total);
    out << ',';
    if (row.old_init.converged && row.new_init.converged && row.new_init.t_total > 0.0)
      out << fmt17(row.old_init.t_total / row.new_init.t_total);
    out << '\n';
  }
  finish(out, file);
}

void write_dre_summary_csv(const std::filesystem::path& file,
                           const std::vector<DreSummaryRow>& rows) {
  std::ofstream out = open_out(file);
  out << "time_steps,shifts,init,status,steps_completed,adi_iterations,solves,"
         "max_solution_columns,final_solution_columns,"
         "t_compress,t_shifts,t_solve,t_total\n";
  for (const DreSummaryRow& r : rows) {
    out << r.time_steps << ',' << csv_field(r.shifts) << ',' << csv_field(r.init) << ','
        << (r.converged ? "converged" : "max-iterations") << ',' << r.steps_completed << ','
        << r.adi_iterations << ',' << r.solves << ',' << r.max_solution_cols << ','
        << r.final_solution_cols << ',';
    if (r.converged)
      out << fmt17(r.t_compress) << ',' << fmt17(r.t_shifts) << ',' << fmt17(r.t_solve) << ','
          << fmt17(r.t_total);
    else
      out << ",,,";
    out << '\n';
  }
  finish(out, file);
}

void write_dre_step_csv(const std::filesystem::path& file, const DreTrace& trace) {
  std::ofstream out = open_out(file);
  out << "step,t,adi_iterations,adi_solves,adi_converged,adi_residual,solution_columns,"
         "t_compress,t_shifts,t_solve,t_total\n";
  for (const DreStepRecord& r : trace.steps)
    out << r.step << ',' << fmt17(r.t) << ',' << r.adi_iterations << ',' << r.adi_solves << ','
        << (r.adi_converged ? 1 : 0) << ',' << fmt17(r.adi_residual) << ',' << r.iterate_cols
        << ',' << fmt17(r.t_compress) << ',' << fmt17(r.t_shifts) << ',' << fmt17(r.t_solve)
        << ',' << fmt17(r.t_total) << '\n';
  out << "total,," << trace.total_adi_iterations << ',' << trace.total_solves << ','
      << (trace.all_steps_converged ? 1 : 0) << ",,," << fmt17(trace.t_compress) << ','
      << fmt17(trace.t_shifts) << ',' << fmt17(trace.t_solve) << ',' << fmt17(trace.t_total)
      << '\n';
  finish(out, file);
}

void write_shift_curves_csv(const std::filesystem::path& file,
                            const std::vector<ShiftCurvePoint>& points) {
  std::ofstream out = open_out(file);
  out << "ordering,k,shift_re,shift_im,radius,rho_hat\n";
  for (const ShiftCurvePoint& p : points)
    out << csv_field(p.ordering) << ',' << p.k << ',' << fmt17(p.shift.real()) << ','
        << fmt17(p.shift.imag()) << ',' << fmt17(p.radius) << ',' << fmt17(p.rho_hat) << '\n';
  finish(out, file);
}

void write_run_manifest(const std::filesystem::path& file,
                        const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out = open_out(file);
  out << "tool = " << version_string() << '\n';
  out << "csv_schema_version = " << csv_schema_version << '\n';
  for (const auto& [key, value] : entries) out << key << " = " << value << '\n';
  finish(out, file);
}

}  // namespace lradi
