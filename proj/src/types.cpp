#include "prft/types.hpp"

#include <cmath>

namespace prft {

Matrix expm_hermitian(const Matrix& h, double s) {
  if (h.rows() == 2 && h.cols() == 2) {
    // closed form via the Pauli decomposition
    const Complex a0 = 0.5 * (h(0, 0) + h(1, 1));
    Matrix b = h;
    b(0, 0) -= a0;
    b(1, 1) -= a0;
    const double a =
        std::sqrt(std::norm(b(0, 0)) + 0.5 * (std::norm(b(0, 1)) +
                                              std::norm(b(1, 0))));
    const double c = std::cos(a * s);
    const double sinc = a < 1e-300 ? s : std::sin(a * s) / a;
    Matrix u = c * Matrix::Identity(2, 2) - iunit * sinc * b;
    return std::exp(Complex(0.0, -a0.real() * s)) * u;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success)
    throw NumericsError("expm_hermitian: eigendecomposition failed");
  const RealVector& ev = es.eigenvalues();
  Vector phases(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    phases[i] = std::exp(Complex(0.0, -ev[i] * s));
  return es.eigenvectors() * phases.asDiagonal() *
         es.eigenvectors().adjoint();
}

double wrap_angle(double phi) {
  double w = std::fmod(phi + pi, 2.0 * pi);
  if (w < 0.0) w += 2.0 * pi;
  return w - pi;
}

namespace {
Matrix make_pauli(Complex a, Complex b, Complex c, Complex d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}
}  // namespace

const Matrix& pauli_x() {
  static const Matrix m = make_pauli(0, 1, 1, 0);
  return m;
}
const Matrix& pauli_y() {
  static const Matrix m = make_pauli(0, Complex(0, -1), Complex(0, 1), 0);
  return m;
}
const Matrix& pauli_z() {
  static const Matrix m = make_pauli(1, 0, 0, -1);
  return m;
}
const Matrix& pauli_plus() {
  static const Matrix m = make_pauli(0, 1, 0, 0);
  return m;
}
const Matrix& pauli_minus() {
  static const Matrix m = make_pauli(0, 0, 1, 0);
  return m;
}

}  // namespace prft
