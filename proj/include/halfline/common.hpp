#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hl {

using cplx = std::complex<double>;
using VecC = Eigen::VectorXcd;
using VecR = Eigen::VectorXd;
using MatC = Eigen::MatrixXcd;
using MatR = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

enum class ErrorKind {
  Input,
  NonIntegrableTail,
  GridTooCoarse,
  TailTooShort,
  ZeroOnContour,
  QuadratureNotConverged,
  MultiplicityAboveOne,
  AtEigenvalue,
  TooCloseToContinuousSpectrum,
  JordanBlockDetected,
  NearSingularity,
  AliasingDetected,
  StepTooLarge,
  DomainEscape,
};

const char* error_name(ErrorKind k);

// Exit code convention of the command line tool: 2 for bad input,
// 3 for numerical refusal or non-convergence.
int error_exit_code(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }
  const char* name() const { return error_name(kind_); }

 private:
  ErrorKind kind_;
};

// Square root with the branch Im >= 0 (Re > 0 on the positive axis).
inline cplx sqrt_upper(cplx z) {
  cplx r = std::sqrt(z);
  if (r.imag() < 0.0 || (r.imag() == 0.0 && r.real() < 0.0)) r = -r;
  return r;
}

// exp(z) - 1 without cancellation for small |z|.
inline cplx cexpm1(cplx z) {
  double x = z.real(), y = z.imag();
  double sh = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2.0 * sh * sh, std::exp(x) * std::sin(y)};
}

}  // namespace hl
