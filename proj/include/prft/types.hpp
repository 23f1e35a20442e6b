#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace prft {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using IndexVector = Eigen::VectorXi;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr Complex iunit{0.0, 1.0};

/// Violated precondition or malformed input (dimension mismatch, bad config).
class SpecError : public std::invalid_argument {
 public:
  explicit SpecError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure (non-convergence, truncation violation). Carries the
/// achieved defect where the caller can act on it.
class NumericsError : public std::runtime_error {
 public:
  explicit NumericsError(const std::string& what, double defect = 0.0)
      : std::runtime_error(what), defect_(defect) {}
  double defect() const { return defect_; }

 private:
  double defect_;
};

inline double hermiticity_defect(const Matrix& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& a, double tol = 1e-12) {
  return a.rows() == a.cols() && hermiticity_defect(a) <= tol;
}

inline double unitarity_defect(const Matrix& u) {
  return (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols()))
      .cwiseAbs()
      .maxCoeff();
}

/// exp(-i H s) for Hermitian H via eigendecomposition; unitary to solver
/// precision.
Matrix expm_hermitian(const Matrix& h, double s);

/// Wraps an angle to [-pi, pi).
double wrap_angle(double phi);

const Matrix& pauli_x();
const Matrix& pauli_y();
const Matrix& pauli_z();
const Matrix& pauli_plus();
const Matrix& pauli_minus();

}  // namespace prft
