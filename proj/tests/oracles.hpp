#pragma once

// Closed forms used as independent references. Nothing here calls into the
// library: piecewise-constant potentials are solved by exact transfer
// matrices, everything else by elementary formulas.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;
inline constexpr double pi = 3.14159265358979323846;

struct Piece {
  double a, b;
  cplx v;
};

// sin(q L) / q with the removable point q = 0.
inline cplx sinc_len(cplx q, double L) {
  if (std::abs(q * L) < 1e-8) return L * (1.0 - q * q * L * L / 6.0);
  return std::sin(q * L) / q;
}

// Constant potential v on consecutive intervals; gaps carry v = 0.
struct Layers {
  std::vector<double> edge;  // 0 = edge[0] < ... < edge[n]
  std::vector<cplx> v;       // value on [edge[i], edge[i+1]]
};

inline Layers layers(std::vector<Piece> pieces) {
  std::sort(pieces.begin(), pieces.end(), [](const Piece& p, const Piece& q) { return p.a < q.a; });
  Layers L;
  L.edge.push_back(0.0);
  for (const Piece& p : pieces) {
    if (p.a > L.edge.back()) {
      L.v.push_back(0.0);
      L.edge.push_back(p.a);
    }
    L.v.push_back(p.v);
    L.edge.push_back(p.b);
  }
  return L;
}

// Exact propagation of (y, y') across length L of constant potential v.
inline void propagate(cplx k, cplx v, double L, cplx& y, cplx& dy) {
  cplx q = std::sqrt(k * k - v);
  cplx c = std::cos(q * L), s = sinc_len(q, L);
  cplx y1 = c * y + s * dy;
  cplx dy1 = -q * q * s * y + c * dy;
  y = y1;
  dy = dy1;
}

// Jost solution e(x, k) and its derivative for a step stack.
inline void jost(const std::vector<Piece>& pieces, cplx k, double x, cplx& e, cplx& de) {
  Layers L = layers(pieces);
  double X = L.edge.back();
  if (x >= X) {
    e = std::exp(cplx(0, 1) * k * x);
    de = cplx(0, 1) * k * e;
    return;
  }
  e = std::exp(cplx(0, 1) * k * X);
  de = cplx(0, 1) * k * e;
  for (int i = static_cast<int>(L.v.size()) - 1; i >= 0; --i) {
    double lo = std::max(L.edge[i], x);
    if (L.edge[i + 1] <= x) break;
    propagate(k, L.v[i], -(L.edge[i + 1] - lo), e, de);
  }
}

inline cplx jost_value(const std::vector<Piece>& pieces, cplx k, double x = 0.0) {
  cplx e, de;
  jost(pieces, k, x, e, de);
  return e;
}

// Regular solution s(x, k), s(0) = 0, s'(0) = 1.
inline void regular(const std::vector<Piece>& pieces, cplx k, double x, cplx& s, cplx& ds) {
  Layers L = layers(pieces);
  s = 0.0;
  ds = 1.0;
  double at = 0.0;
  for (size_t i = 0; i < L.v.size() && at < x; ++i) {
    double hi = std::min(L.edge[i + 1], x);
    propagate(k, L.v[i], hi - at, s, ds);
    at = hi;
  }
  if (at < x) propagate(k, 0.0, x - at, s, ds);
}

// Single step v0 on [0, a]: e(k) = e^{ika}[cos qa - i(k/q) sin qa].
inline cplx jost_step(cplx v0, double a, cplx k) {
  cplx q = std::sqrt(k * k - v0);
  return std::exp(cplx(0, 1) * k * a) * (std::cos(q * a) - cplx(0, 1) * k * sinc_len(q, a));
}

// Fourth-order central difference of an analytic function.
inline cplx derivative(const std::function<cplx(cplx)>& f, cplx z, double h = 1e-3) {
  return (-f(z + 2.0 * h) + 8.0 * f(z + h) - 8.0 * f(z - h) + f(z - 2.0 * h)) / (12.0 * h);
}

// Bound states of the real well -d on [0, a] as values beta > beta_min with
// e(i beta) = 0, found by sign changes of q cos(qa) + beta sin(qa) in q, where
// q^2 + beta^2 = d.
inline std::vector<double> well_roots(double d, double a, double beta_min) {
  std::vector<double> out;
  if (d <= beta_min * beta_min) return out;
  const double qmax = std::sqrt(d - beta_min * beta_min);
  auto f = [&](double q) {
    double beta = std::sqrt(std::max(0.0, d - q * q));
    return q * std::cos(q * a) + beta * std::sin(q * a);
  };
  const int n = 4000;
  double q0 = 0.0, f0 = f(1e-12);
  for (int i = 1; i <= n; ++i) {
    double q1 = qmax * i / n, f1 = f(q1);
    if ((f0 < 0) != (f1 < 0)) {
      double lo = q0, hi = q1;
      for (int it = 0; it < 100; ++it) {
        double mid = 0.5 * (lo + hi);
        if ((f(mid) < 0) == (f0 < 0)) lo = mid; else hi = mid;
      }
      out.push_back(std::sqrt(d - lo * lo));
    }
    q0 = q1;
    f0 = f1;
  }
  return out;
}

// (R0(k^2) u)(x) for u = e^{-x}: the outgoing solution of -y'' - k^2 y = u
// with y(0) = 0.
inline cplx free_resolvent_exp(cplx k, double x) {
  return -(std::exp(-x) - std::exp(cplx(0, 1) * k * x)) / (1.0 + k * k);
}

// Same with the t-integral stopped at X >= x; the dropped part is
// (sin kx / k) e^{(ik - 1)X} / (1 - ik).
inline cplx free_resolvent_exp_to(cplx k, double x, double X) {
  const cplx ik = cplx(0, 1) * k;
  return free_resolvent_exp(k, x) - sinc_len(k, x) * std::exp((ik - 1.0) * X) / (1.0 - ik);
}

// Free kernel sin(k min) e^{ik max} / k.
inline cplx free_kernel(cplx k, double x, double y) {
  double lo = std::min(x, y), hi = std::max(x, y);
  return sinc_len(k, lo) * std::exp(cplx(0, 1) * k * hi);
}

}  // namespace oracle
