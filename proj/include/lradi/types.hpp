#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace lradi {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using SpMatC = Eigen::SparseMatrix<Complex>;

// unit roundoff of binary64 (half the machine epsilon); truncation rules scale with it
inline constexpr double unit_roundoff = std::numeric_limits<double>::epsilon() / 2.0;

// structural misuse: dimension mismatches, invalid options, malformed files
class structural_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// a shifted coefficient matrix came out singular; remembers the offending shift
class singular_shift_error : public std::runtime_error {
 public:
  singular_shift_error(const std::string& what, Complex shift)
      : std::runtime_error(what), shift_(shift) {}
  Complex shift() const { return shift_; }

 private:
  Complex shift_;
};

// numerical failure that is not plain non-convergence (which is reported in results)
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lradi
