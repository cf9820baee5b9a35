#include "halfline/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "halfline/quadrature.hpp"

namespace hl {

Potential::Potential() = default;

Potential Potential::step_stack(std::vector<StepPiece> pieces) {
  std::sort(pieces.begin(), pieces.end(),
            [](const StepPiece& x, const StepPiece& y) { return x.a < y.a; });
  for (size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    if (!(p.a >= 0.0) || !(p.b > p.a) || !std::isfinite(p.b))
      throw Error(ErrorKind::Input, "step piece needs 0 <= a < b < inf");
    if (i > 0 && p.a < pieces[i - 1].b - 1e-15)
      throw Error(ErrorKind::Input, "step pieces overlap");
  }
  Potential P;
  P.kind_ = PotentialKind::StepStack;
  for (auto& p : pieces)
    if (p.v != cplx(0.0, 0.0)) P.pieces_.push_back(p);
  return P;
}

Potential Potential::step(cplx v0, double a) {
  return step_stack({StepPiece{0.0, a, v0}});
}

Potential Potential::exponential(cplx amplitude, double rate) {
  if (!(rate > 0.0)) throw Error(ErrorKind::Input, "exponential rate must be > 0");
  Potential P;
  P.kind_ = PotentialKind::Exponential;
  P.amp_ = amplitude;
  P.par_ = rate;
  return P;
}

Potential Potential::gaussian(cplx amplitude, double width) {
  if (!(width > 0.0)) throw Error(ErrorKind::Input, "gaussian width must be > 0");
  Potential P;
  P.kind_ = PotentialKind::Gaussian;
  P.amp_ = amplitude;
  P.par_ = width;
  return P;
}

Potential Potential::sampled(std::vector<double> x, std::vector<cplx> v,
                             TailKind tail, double tail_param) {
  if (x.size() < 2 || x.size() != v.size())
    throw Error(ErrorKind::Input, "sampled potential needs >= 2 matching samples");
  if (x.front() != 0.0)
    throw Error(ErrorKind::Input, "sampled abscissae must start at 0");
  for (size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1]))
      throw Error(ErrorKind::Input, "sampled abscissae must increase strictly");
  for (auto z : v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw Error(ErrorKind::Input, "sampled values must be finite");
  if (tail == TailKind::Exponential && !(tail_param > 0.0))
    throw Error(ErrorKind::Input, "exponential tail rate must be > 0");
  Potential P;
  P.kind_ = PotentialKind::Sampled;
  P.sx_ = std::move(x);
  P.sv_ = std::move(v);
  P.tail_ = tail;
  P.tail_par_ = tail_param;
  P.check_tail_integrable();
  return P;
}

cplx Potential::operator()(double x) const {
  switch (kind_) {
    case PotentialKind::StepStack:
      for (const auto& p : pieces_)
        if (x >= p.a && x < p.b) return p.v;
      return 0.0;
    case PotentialKind::Exponential:
      return amp_ * std::exp(-par_ * x);
    case PotentialKind::Gaussian:
      return amp_ * std::exp(-(x / par_) * (x / par_));
    case PotentialKind::Sampled: {
      if (x < 0.0) return sv_.front();
      const double xl = sx_.back();
      if (x >= xl) {
        switch (tail_) {
          case TailKind::Zero:
            return x == xl ? sv_.back() : cplx(0.0, 0.0);
          case TailKind::Exponential:
            return sv_.back() * std::exp(-tail_par_ * (x - xl));
          case TailKind::Power:
            return sv_.back() * std::pow(xl / x, tail_par_);
        }
      }
      auto it = std::upper_bound(sx_.begin(), sx_.end(), x);
      size_t j = static_cast<size_t>(it - sx_.begin());
      double t = (x - sx_[j - 1]) / (sx_[j] - sx_[j - 1]);
      return (1.0 - t) * sv_[j - 1] + t * sv_[j];
    }
  }
  return 0.0;
}

bool Potential::is_zero() const {
  switch (kind_) {
    case PotentialKind::StepStack:
      return pieces_.empty();
    case PotentialKind::Exponential:
    case PotentialKind::Gaussian:
      return amp_ == cplx(0.0, 0.0);
    case PotentialKind::Sampled:
      return std::all_of(sv_.begin(), sv_.end(),
                         [](cplx z) { return z == cplx(0.0, 0.0); });
  }
  return false;
}

bool Potential::is_real() const {
  switch (kind_) {
    case PotentialKind::StepStack:
      return std::all_of(pieces_.begin(), pieces_.end(),
                         [](const StepPiece& p) { return p.v.imag() == 0.0; });
    case PotentialKind::Exponential:
    case PotentialKind::Gaussian:
      return amp_.imag() == 0.0;
    case PotentialKind::Sampled:
      return std::all_of(sv_.begin(), sv_.end(),
                         [](cplx z) { return z.imag() == 0.0; });
  }
  return false;
}

bool Potential::compact() const {
  return kind_ == PotentialKind::StepStack ||
         (kind_ == PotentialKind::Sampled && tail_ == TailKind::Zero) ||
         is_zero();
}

bool Potential::piecewise_constant() const {
  return kind_ == PotentialKind::StepStack || is_zero();
}

double Potential::sup_norm() const {
  switch (kind_) {
    case PotentialKind::StepStack: {
      double m = 0.0;
      for (const auto& p : pieces_) m = std::max(m, std::abs(p.v));
      return m;
    }
    case PotentialKind::Exponential:
    case PotentialKind::Gaussian:
      return std::abs(amp_);
    case PotentialKind::Sampled: {
      double m = 0.0;
      for (auto z : sv_) m = std::max(m, std::abs(z));
      return m;
    }
  }
  return 0.0;
}

void Potential::check_tail_integrable() const {
  if (kind_ == PotentialKind::Sampled && tail_ == TailKind::Power &&
      sv_.back() != cplx(0.0, 0.0) && !(tail_par_ > 2.0))
    throw Error(ErrorKind::NonIntegrableTail,
                "power tail x^-p with p <= 2 has divergent first moment");
}

// Integral of x|V| over [X, inf) for X at or beyond the smooth region.
double Potential::tail_moment_beyond(double X) const {
  switch (kind_) {
    case PotentialKind::StepStack:
      return 0.0;
    case PotentialKind::Exponential: {
      double r = par_;
      return std::abs(amp_) * std::exp(-r * X) * (X / r + 1.0 / (r * r));
    }
    case PotentialKind::Gaussian: {
      double w = par_;
      return std::abs(amp_) * 0.5 * w * w * std::exp(-(X / w) * (X / w));
    }
    case PotentialKind::Sampled: {
      double xl = sx_.back(), vl = std::abs(sv_.back());
      X = std::max(X, xl);
      switch (tail_) {
        case TailKind::Zero:
          return 0.0;
        case TailKind::Exponential: {
          double r = tail_par_;
          return vl * std::exp(-r * (X - xl)) * (X / r + 1.0 / (r * r));
        }
        case TailKind::Power: {
          double p = tail_par_;
          if (vl == 0.0) return 0.0;
          return vl * std::pow(xl, p) * std::pow(X, 2.0 - p) / (p - 2.0);
        }
      }
    }
  }
  return 0.0;
}

double Potential::support_hint(double tail_tol) const {
  check_tail_integrable();
  if (is_zero()) return 0.0;
  // Half the tolerance, so that the certified bound exp(m) - 1 > m still fits.
  tail_tol *= 0.5;
  switch (kind_) {
    case PotentialKind::StepStack:
      return pieces_.back().b;
    case PotentialKind::Gaussian: {
      double w = par_, A = std::abs(amp_);
      double arg = std::log(std::max(1.0, A * w * w / (2.0 * tail_tol)));
      return w * std::sqrt(arg);
    }
    case PotentialKind::Exponential:
    case PotentialKind::Sampled: {
      double lo = kind_ == PotentialKind::Sampled ? sx_.back() : 0.0;
      if (tail_moment_beyond(lo) <= tail_tol) return lo;
      double hi = std::max(1.0, 2.0 * lo);
      while (tail_moment_beyond(hi) > tail_tol) hi *= 2.0;
      for (int it = 0; it < 200 && hi - lo > 1e-9 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (tail_moment_beyond(mid) > tail_tol ? lo : hi) = mid;
      }
      return hi;
    }
  }
  return 0.0;
}

std::vector<double> Potential::breakpoints() const {
  std::vector<double> b;
  if (kind_ == PotentialKind::StepStack) {
    for (const auto& p : pieces_) {
      if (p.a > 0.0) b.push_back(p.a);
      b.push_back(p.b);
    }
  } else if (kind_ == PotentialKind::Sampled) {
    for (size_t i = 1; i < sx_.size(); ++i) b.push_back(sx_[i]);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

double Potential::weighted_abs_integral(
    double x0, double x1, const std::function<double(double)>& weight,
    double rel_tol) const {
  if (is_zero() || !(x1 > x0)) return 0.0;
  check_tail_integrable();
  auto f = [&](double x) { return weight(x) * std::abs((*this)(x)); };
  std::vector<double> cuts{x0};
  for (double b : breakpoints())
    if (b > x0 && b < x1) cuts.push_back(b);
  double smooth_end = x1;
  bool infinite_tail = false;
  if (!std::isfinite(x1)) {
    // Finite pieces up to the last nonsmooth point, exp-sinh beyond it.
    double last = kind_ == PotentialKind::Sampled ? sx_.back() : 0.0;
    if (kind_ == PotentialKind::StepStack)
      last = pieces_.empty() ? 0.0 : pieces_.back().b;
    smooth_end = std::max(x0, last);
    infinite_tail = !compact();
  }
  cuts.push_back(smooth_end);
  double total = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (!(cuts[i + 1] > cuts[i])) continue;
    auto fc = [&](double x) { return cplx(f(x), 0.0); };
    total += integrate_adaptive(fc, cuts[i], cuts[i + 1], rel_tol).real();
  }
  if (infinite_tail) {
    boost::math::quadrature::exp_sinh<double> es;
    double shift = smooth_end;
    auto g = [&](double u) { return f(shift + u); };
    total += es.integrate(g, 0.0, std::numeric_limits<double>::infinity(),
                          std::max(rel_tol, 1e-15));
  }
  return total;
}

Potential Potential::conjugate() const {
  Potential P = *this;
  for (auto& p : P.pieces_) p.v = std::conj(p.v);
  P.amp_ = std::conj(P.amp_);
  for (auto& z : P.sv_) z = std::conj(z);
  return P;
}

Potential Potential::scaled(cplx c) const {
  Potential P = *this;
  for (auto& p : P.pieces_) p.v *= c;
  P.amp_ *= c;
  for (auto& z : P.sv_) z *= c;
  if (P.kind_ == PotentialKind::StepStack) {
    std::vector<StepPiece> keep;
    for (auto& p : P.pieces_)
      if (p.v != cplx(0.0, 0.0)) keep.push_back(p);
    P.pieces_ = keep;
  }
  return P;
}

std::string Potential::family() const {
  switch (kind_) {
    case PotentialKind::StepStack:
      return "step";
    case PotentialKind::Exponential:
      return "exponential";
    case PotentialKind::Gaussian:
      return "gaussian";
    case PotentialKind::Sampled:
      return "sampled";
  }
  return "unknown";
}

double first_moment(const Potential& P, double rel_tol) {
  if (P.is_zero()) return 0.0;
  if (P.kind() == PotentialKind::StepStack) {
    double m = 0.0;
    for (const auto& p : P.pieces()) m += std::abs(p.v) * 0.5 * (p.b * p.b - p.a * p.a);
    return m;
  }
  double coarse = P.weighted_abs_integral(0.0, std::numeric_limits<double>::infinity(),
                                          [](double x) { return x; }, 1e-6);
  double fine = P.weighted_abs_integral(0.0, std::numeric_limits<double>::infinity(),
                                        [](double x) { return x; }, 1e-13);
  if (std::abs(fine - coarse) > std::max(rel_tol, 1e-6) * std::abs(fine) + 1e-300)
    throw Error(ErrorKind::QuadratureNotConverged,
                "first moment quadrature did not settle under refinement");
  return fine;
}

const char* to_string(KatoVerdict v) {
  return v == KatoVerdict::GuaranteedSimilar ? "guaranteed_similar" : "inconclusive";
}

KatoVerdict kato_verdict(const Potential& P) {
  return first_moment(P) < 1.0 ? KatoVerdict::GuaranteedSimilar
                               : KatoVerdict::Inconclusive;
}

FactorPair factorize(const Potential& P) {
  FactorPair f;
  f.a = [P](double x) { return std::sqrt(std::abs(P(x))); };
  f.b = [P](double x) {
    cplx v = P(x);
    return csign(std::conj(v)) * std::sqrt(std::abs(v));
  };
  f.a_weighted = std::sqrt(first_moment(P));
  f.b_weighted = f.a_weighted;
  return f;
}

namespace {

std::string strip(const std::string& s) {
  std::string r;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) r.push_back(c);
  return r;
}

double to_double(const std::string& s, const std::string& ctx) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Input, "cannot parse number '" + s + "' in " + ctx);
  }
}

}  // namespace

cplx parse_complex(const std::string& text) {
  std::string s = strip(text);
  if (s.empty()) throw Error(ErrorKind::Input, "empty complex number");
  if (s.front() == '(' || s.front() == '[') {
    auto comma = s.find(',');
    if (comma == std::string::npos || (s.back() != ')' && s.back() != ']'))
      throw Error(ErrorKind::Input, "malformed complex pair '" + text + "'");
    return {to_double(s.substr(1, comma - 1), text),
            to_double(s.substr(comma + 1, s.size() - comma - 2), text)};
  }
  char last = s.back();
  if (last != 'i' && last != 'j') return {to_double(s, text), 0.0};
  std::string body = s.substr(0, s.size() - 1);
  size_t split = std::string::npos;
  for (size_t i = body.size(); i-- > 1;) {
    if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  auto imag_of = [&](const std::string& t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return to_double(t, text);
  };
  if (split == std::string::npos) return {0.0, imag_of(body)};
  return {to_double(body.substr(0, split), text), imag_of(body.substr(split))};
}

std::vector<StepPiece> parse_pieces(const std::string& text) {
  std::vector<StepPiece> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = strip(item);
    if (item.empty()) continue;
    auto c1 = item.find(':');
    auto c2 = item.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw Error(ErrorKind::Input, "step piece must read a:b:value, got '" + item + "'");
    out.push_back({to_double(item.substr(0, c1), item),
                   to_double(item.substr(c1 + 1, c2 - c1 - 1), item),
                   parse_complex(item.substr(c2 + 1))});
  }
  if (out.empty()) throw Error(ErrorKind::Input, "no step pieces given");
  return out;
}

Potential read_sampled_csv(const std::string& path, TailKind tail, double tail_param) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Input, "cannot open potential CSV '" + path + "'");
  std::vector<double> xs;
  std::vector<cplx> vs;
  std::string line;
  while (std::getline(in, line)) {
    std::string s = strip(line);
    if (s.empty() || s[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ls(s);
    std::string c;
    while (std::getline(ls, c, ',')) cols.push_back(c);
    if (cols.size() < 2) throw Error(ErrorKind::Input, "CSV row needs x, Re V[, Im V]");
    bool numeric = std::isdigit(static_cast<unsigned char>(cols[0][0])) ||
                   cols[0][0] == '-' || cols[0][0] == '.' || cols[0][0] == '+';
    if (!numeric) {
      if (xs.empty()) continue;  // header
      throw Error(ErrorKind::Input, "non-numeric CSV row '" + line + "'");
    }
    xs.push_back(to_double(cols[0], path));
    vs.emplace_back(to_double(cols[1], path), cols.size() > 2 ? to_double(cols[2], path) : 0.0);
  }
  return Potential::sampled(xs, vs, tail, tail_param);
}

}  // namespace hl
