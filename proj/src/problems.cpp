#include "lradi/problems.hpp"

#include <algorithm>
#include <cctype>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include "lradi/oracle.hpp"

namespace lradi {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw structural_error(what);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

void HeatProblemOptions::validate() const {
  require(grid >= 1, "heat problem: grid must be positive");
  require(dim == 1 || dim == 2, "heat problem: dim must be 1 or 2");
  const long n = dim == 1 ? grid : static_cast<long>(grid) * grid;
  require(n <= 4096, "heat problem: order limited to 4096");
  require(inputs >= 1 && inputs <= 8, "heat problem: inputs must lie in [1, 8]");
  require(outputs >= 1 && outputs <= 8, "heat problem: outputs must lie in [1, 8]");
  require(inputs + outputs <= n, "heat problem: not enough nodes for distinct input/output positions");
  require(std::isfinite(beta) && beta > 0.0, "heat problem: beta must be positive");
}

GeneratedProblem generate_heat_problem(const HeatProblemOptions& opt) {
  opt.validate();
  const Index g = opt.grid;
  const Index n = opt.dim == 1 ? g : g * g;
  const double scale = static_cast<double>((g + 1) * (g + 1));  // 1/h^2 on the unit domain

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(1 + 2 * opt.dim));
  if (opt.dim == 1) {
    for (Index i = 0; i < n; ++i) {
      trips.emplace_back(i, i, -2.0 * scale);
      if (i > 0) trips.emplace_back(i, i - 1, scale);
      if (i + 1 < n) trips.emplace_back(i, i + 1, scale);
    }
  } else {
    auto id = [g](Index i, Index j) { return i * g + j; };
    for (Index i = 0; i < g; ++i)
      for (Index j = 0; j < g; ++j) {
        const Index k = id(i, j);
        trips.emplace_back(k, k, -4.0 * scale);
        if (i > 0) trips.emplace_back(k, id(i - 1, j), scale);
        if (i + 1 < g) trips.emplace_back(k, id(i + 1, j), scale);
        if (j > 0) trips.emplace_back(k, id(i, j - 1), scale);
        if (j + 1 < g) trips.emplace_back(k, id(i, j + 1), scale);
      }
  }

  GeneratedProblem p;
  p.A.resize(n, n);
  p.A.setFromTriplets(trips.begin(), trips.end());
  p.A.makeCompressed();

  p.E.resize(n, n);
  p.identity_E = opt.mass == HeatProblemOptions::Mass::identity;
  if (p.identity_E) {
    p.E.setIdentity();
  } else {
    // stand-in for a lumped mass: seeded SPD diagonal, well clear of zero
    std::mt19937_64 rng(opt.seed ^ 0xda3e39cb94b95bdbull);
    std::uniform_real_distribution<double> mass(0.5, 1.5);
    std::vector<Eigen::Triplet<double>> diag;
    diag.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) diag.emplace_back(i, i, mass(rng));
    p.E.setFromTriplets(diag.begin(), diag.end());
  }
  p.E.makeCompressed();

  // distinct node positions for inputs and outputs, fixed by the seed
  std::vector<Index> nodes(static_cast<std::size_t>(n));
  std::iota(nodes.begin(), nodes.end(), Index{0});
  std::mt19937_64 rng(opt.seed);
  std::shuffle(nodes.begin(), nodes.end(), rng);

  p.B = MatrixXd::Zero(n, opt.inputs);
  for (int j = 0; j < opt.inputs; ++j) p.B(nodes[static_cast<std::size_t>(j)], j) = opt.beta;
  p.C = MatrixXd::Zero(opt.outputs, n);
  for (int i = 0; i < opt.outputs; ++i)
    p.C(i, nodes[static_cast<std::size_t>(opt.inputs + i)]) = 1.0;

  if (n <= 400) {
    for (const Complex& lambda : oracle::generalized_spectrum(MatrixXd(p.A), MatrixXd(p.E)))
      if (lambda.real() >= 0.0) throw numerical_error("generated heat problem is not stable");
  }

  p.metadata["grid"] = std::to_string(opt.grid);
  p.metadata["dim"] = std::to_string(opt.dim);
  p.metadata["beta"] = fmt17(opt.beta);
  p.metadata["seed"] = std::to_string(opt.seed);
  p.metadata["mass"] = p.identity_E ? "identity" : "lumped";
  return p;
}

// --- matrix market -----------------------------------------------------------

void write_matrix_market(const std::filesystem::path& file, const SpMat& M) {
  std::ofstream out(file);
  require(out.good(), "cannot open " + file.string() + " for writing");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << M.rows() << ' ' << M.cols() << ' ' << M.nonZeros() << '\n';
  for (int k = 0; k < M.outerSize(); ++k)
    for (SpMat::InnerIterator it(M, k); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << fmt17(it.value()) << '\n';
  require(out.good(), "write failed for " + file.string());
}

void write_matrix_market(const std::filesystem::path& file, const MatrixXd& M) {
  std::ofstream out(file);
  require(out.good(), "cannot open " + file.string() + " for writing");
  out << "%%MatrixMarket matrix array real general\n";
  out << M.rows() << ' ' << M.cols() << '\n';
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i) out << fmt17(M(i, j)) << '\n';
  require(out.good(), "write failed for " + file.string());
}

namespace {

struct MmHeader {
  bool coordinate = false;
  bool symmetric = false;
};

MmHeader read_mm_header(std::istream& in, const std::string& name) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), name + ": empty file");
  std::istringstream hs(line);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  require(banner == "%%MatrixMarket", name + ": missing MatrixMarket banner");
  require(lower(object) == "matrix", name + ": unsupported object '" + object + "'");
  MmHeader h;
  const std::string fm = lower(format);
  if (fm == "coordinate")
    h.coordinate = true;
  else
    require(fm == "array", name + ": unsupported format '" + format + "'");
  const std::string fl = lower(field);
  require(fl == "real" || fl == "integer", name + ": unsupported field '" + field + "'");
  const std::string sy = lower(symmetry);
  if (sy == "symmetric")
    h.symmetric = true;
  else
    require(sy == "general", name + ": unsupported symmetry '" + symmetry + "'");
  return h;
}

// first non-comment, non-blank line after the banner
std::string next_content_line(std::istream& in, const std::string& name) {
  std::string line;
  while (std::getline(in, line)) {
    std::size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    if (line[pos] == '%') continue;
    return line;
  }
  throw structural_error(name + ": truncated matrix market file");
}

}  // namespace

SpMat read_matrix_market_sparse(const std::filesystem::path& file) {
  std::ifstream in(file);
  require(in.good(), "cannot open " + file.string());
  const std::string name = file.string();
  const MmHeader h = read_mm_header(in, name);
  require(h.coordinate, name + ": expected a coordinate (sparse) file");

  std::istringstream sz(next_content_line(in, name));
  long rows = 0, cols = 0, nnz = 0;
  sz >> rows >> cols >> nnz;
  require(!sz.fail() && rows >= 0 && cols >= 0 && nnz >= 0, name + ": bad size line");

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(h.symmetric ? 2 * nnz : nnz));
  for (long k = 0; k < nnz; ++k) {
    std::istringstream es(next_content_line(in, name));
    long i = 0, j = 0;
    double v = 0.0;
    es >> i >> j >> v;
    require(!es.fail(), name + ": bad entry line");
    require(i >= 1 && i <= rows && j >= 1 && j <= cols, name + ": entry out of range");
    trips.emplace_back(i - 1, j - 1, v);
    if (h.symmetric && i != j) trips.emplace_back(j - 1, i - 1, v);
  }
  SpMat M(rows, cols);
  M.setFromTriplets(trips.begin(), trips.end());
  M.makeCompressed();
  return M;
}

MatrixXd read_matrix_market_dense(const std::filesystem::path& file) {
  std::ifstream in(file);
  require(in.good(), "cannot open " + file.string());
  const std::string name = file.string();
  const MmHeader h = read_mm_header(in, name);
  require(!h.coordinate, name + ": expected an array (dense) file");
  require(!h.symmetric, name + ": symmetric array files are not supported");

  std::istringstream sz(next_content_line(in, name));
  long rows = 0, cols = 0;
  sz >> rows >> cols;
  require(!sz.fail() && rows >= 0 && cols >= 0, name + ": bad size line");

  MatrixXd M(rows, cols);
  for (long j = 0; j < cols; ++j)
    for (long i = 0; i < rows; ++i) {
      std::istringstream es(next_content_line(in, name));
      double v = 0.0;
      es >> v;
      require(!es.fail(), name + ": bad value line");
      M(i, j) = v;
    }
  return M;
}

// --- problem bundles ---------------------------------------------------------

void write_problem_bundle(const std::filesystem::path& dir, const GeneratedProblem& p) {
  std::filesystem::create_directories(dir);
  write_matrix_market(dir / "A.mtx", p.A);
  write_matrix_market(dir / "B.mtx", p.B);
  write_matrix_market(dir / "C.mtx", p.C);
  if (!p.identity_E) write_matrix_market(dir / "E.mtx", p.E);

  std::ofstream out(dir / "problem.manifest");
  require(out.good(), "cannot open " + (dir / "problem.manifest").string() + " for writing");
  out << "n = " << p.A.rows() << '\n';
  out << "m = " << p.B.cols() << '\n';
  out << "q = " << p.C.rows() << '\n';
  out << "files.A = A.mtx\n";
  if (!p.identity_E) out << "files.E = E.mtx\n";
  out << "files.B = B.mtx\n";
  out << "files.C = C.mtx\n";
  for (const auto& [key, value] : p.metadata) out << key << " = " << value << '\n';
  require(out.good(), "write failed for " + (dir / "problem.manifest").string());
}

GeneratedProblem read_problem_bundle(const std::filesystem::path& dir) {
  const std::filesystem::path mf = dir / "problem.manifest";
  std::ifstream in(mf);
  require(in.good(), "cannot open " + mf.string());

  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const std::size_t start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    const std::size_t eq = line.find('=');
    require(eq != std::string::npos && eq > start, mf.string() + ": malformed line '" + line + "'");
    auto trim = [](std::string s) {
      const std::size_t a = s.find_first_not_of(" \t\r");
      const std::size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
    };
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  for (const char* key : {"n", "m", "q", "files.A", "files.B", "files.C"})
    require(kv.count(key) > 0, mf.string() + ": missing key '" + std::string(key) + "'");

  GeneratedProblem p;
  p.A = read_matrix_market_sparse(dir / kv.at("files.A"));
  p.B = read_matrix_market_dense(dir / kv.at("files.B"));
  p.C = read_matrix_market_dense(dir / kv.at("files.C"));
  if (kv.count("files.E")) {
    p.E = read_matrix_market_sparse(dir / kv.at("files.E"));
    p.identity_E = false;
  } else {
    p.E.resize(p.A.rows(), p.A.cols());
    p.E.setIdentity();
    p.identity_E = true;
  }

  const long n = std::stol(kv.at("n"));
  const long m = std::stol(kv.at("m"));
  const long q = std::stol(kv.at("q"));
  require(p.A.rows() == n && p.A.cols() == n, mf.string() + ": A does not match declared order");
  require(p.E.rows() == n && p.E.cols() == n, mf.string() + ": E does not match declared order");
  require(p.B.rows() == n && p.B.cols() == m, mf.string() + ": B does not match declared shape");
  require(p.C.rows() == q && p.C.cols() == n, mf.string() + ": C does not match declared shape");

  for (const auto& [key, value] : kv)
    if (key != "n" && key != "m" && key != "q" && key.rfind("files.", 0) != 0)
      p.metadata[key] = value;
  return p;
}

}  // namespace lradi
