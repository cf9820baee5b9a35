#pragma once

#include <functional>
#include <string>
#include <vector>

#include "halfline/common.hpp"

namespace hl {

enum class PotentialKind { StepStack, Exponential, Gaussian, Sampled };

// Continuation of a sampled potential beyond its last abscissa x_L:
// zero, V_L exp(-r (x - x_L)), or V_L (x_L / x)^p.
enum class TailKind { Zero, Exponential, Power };

struct StepPiece {
  double a;
  double b;
  cplx v;
};

class Potential {
 public:
  Potential();  // V = 0

  static Potential step_stack(std::vector<StepPiece> pieces);
  static Potential step(cplx v0, double a);  // v0 on [0, a]
  static Potential exponential(cplx amplitude, double rate);
  // amplitude * exp(-(x / width)^2)
  static Potential gaussian(cplx amplitude, double width);
  static Potential sampled(std::vector<double> x, std::vector<cplx> v,
                           TailKind tail = TailKind::Zero,
                           double tail_param = 0.0);

  PotentialKind kind() const { return kind_; }
  cplx operator()(double x) const;
  bool is_zero() const;
  bool is_real() const;
  // V vanishes identically beyond support_hint().
  bool compact() const;
  // V is constant between consecutive breakpoints.
  bool piecewise_constant() const;

  double sup_norm() const;
  // X_V such that the first-moment tail beyond X_V is below tail_tol.
  double support_hint(double tail_tol = 1e-10) const;
  // Points of nonsmoothness within [0, support_hint()].
  std::vector<double> breakpoints() const;

  // Integral of weight(x) |V(x)| over [x0, x1]; x1 may be +infinity.
  double weighted_abs_integral(double x0, double x1,
                               const std::function<double(double)>& weight,
                               double rel_tol = 1e-12) const;

  Potential conjugate() const;
  Potential scaled(cplx c) const;

  std::string family() const;
  const std::vector<StepPiece>& pieces() const { return pieces_; }
  cplx amplitude() const { return amp_; }
  double rate() const { return par_; }
  double width() const { return par_; }
  const std::vector<double>& sample_x() const { return sx_; }
  const std::vector<cplx>& sample_v() const { return sv_; }
  TailKind tail_kind() const { return tail_; }
  double tail_param() const { return tail_par_; }

 private:
  void check_tail_integrable() const;
  double tail_moment_beyond(double X) const;

  PotentialKind kind_ = PotentialKind::StepStack;
  std::vector<StepPiece> pieces_;
  cplx amp_{0.0, 0.0};
  double par_ = 1.0;
  std::vector<double> sx_;
  std::vector<cplx> sv_;
  TailKind tail_ = TailKind::Zero;
  double tail_par_ = 0.0;
};

// Integral of x |V(x)| over the half-line.
double first_moment(const Potential& P, double rel_tol = 1e-10);

enum class KatoVerdict { GuaranteedSimilar, Inconclusive };
const char* to_string(KatoVerdict v);
KatoVerdict kato_verdict(const Potential& P);

// Polar factorization V = conj(b) a with a = sqrt|V|, b = sign(conj V) a.
struct FactorPair {
  std::function<double(double)> a;
  std::function<cplx(double)> b;
  double a_weighted = 0.0;  // <a> = sqrt(integral of x a^2)
  double b_weighted = 0.0;
};

FactorPair factorize(const Potential& P);

// Complex sign with sign(0) = 0.
inline cplx csign(cplx z) {
  double r = std::abs(z);
  return r == 0.0 ? cplx(0.0, 0.0) : z / r;
}

// Parse a potential from key=value pairs: family=step|exponential|gaussian|
// sampled with v0/a, pieces, amplitude/rate, amplitude/width, csv/tail.
// Complex numbers are written as re, re+imi, or re,im in brackets.
cplx parse_complex(const std::string& text);
std::vector<StepPiece> parse_pieces(const std::string& text);
Potential read_sampled_csv(const std::string& path, TailKind tail,
                           double tail_param);

}  // namespace hl
