#include "halfline/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>

namespace hl {

const GaussRule& gauss_legendre(int q) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(q);
  if (it != cache.end()) return it->second;
  if (q < 1) throw Error(ErrorKind::Input, "gauss_legendre: q must be >= 1");
  // boost returns the nonnegative zeros in increasing order.
  std::vector<double> z = boost::math::legendre_p_zeros<double>(q);
  std::vector<double> nodes;
  for (auto r = z.rbegin(); r != z.rend(); ++r)
    if (*r != 0.0) nodes.push_back(-*r);
  for (double v : z) nodes.push_back(v);
  GaussRule g;
  g.t.resize(q);
  g.w.resize(q);
  for (int i = 0; i < q; ++i) {
    double x = nodes[i];
    double dp = boost::math::legendre_p_prime(q, x);
    g.t(i) = x;
    g.w(i) = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return cache.emplace(q, std::move(g)).first->second;
}

VecR barycentric_weights(const VecR& t) {
  const int n = t.size();
  VecR lam = VecR::Ones(n);
  for (int j = 0; j < n; ++j)
    for (int m = 0; m < n; ++m)
      if (m != j) lam(j) /= (t(j) - t(m));
  return lam;
}

MatR lagrange_matrix(const VecR& t, const VecR& s) {
  const int n = t.size();
  VecR lam = barycentric_weights(t);
  MatR L(s.size(), n);
  for (int i = 0; i < s.size(); ++i) {
    int hit = -1;
    for (int j = 0; j < n; ++j)
      if (s(i) == t(j)) hit = j;
    if (hit >= 0) {
      L.row(i).setZero();
      L(i, hit) = 1.0;
      continue;
    }
    double den = 0.0;
    for (int j = 0; j < n; ++j) {
      L(i, j) = lam(j) / (s(i) - t(j));
      den += L(i, j);
    }
    L.row(i) /= den;
  }
  return L;
}

MatR partial_integration_matrix(const VecR& t) {
  const int n = t.size();
  const GaussRule& g = gauss_legendre(n);
  MatR C(n, n);
  for (int i = 0; i < n; ++i) {
    // Gauss rule mapped onto [-1, t_i] is exact for the degree n-1 basis.
    double half = 0.5 * (t(i) + 1.0);
    VecR s = (g.t.array() + 1.0) * half - 1.0;
    MatR L = lagrange_matrix(t, s);
    C.row(i) = (g.w.transpose() * half) * L;
  }
  return C;
}

MatR differentiation_matrix(const VecR& t) {
  const int n = t.size();
  VecR lam = barycentric_weights(t);
  MatR D = MatR::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      D(i, j) = (lam(j) / lam(i)) / (t(i) - t(j));
      diag -= D(i, j);
    }
    D(i, i) = diag;
  }
  return D;
}

PanelRule panel_rule(const std::vector<double>& edges, int q) {
  const GaussRule& g = gauss_legendre(q);
  const int np = static_cast<int>(edges.size()) - 1;
  PanelRule r;
  r.x.resize(np * q);
  r.w.resize(np * q);
  for (int p = 0; p < np; ++p) {
    double a = edges[p], b = edges[p + 1];
    for (int j = 0; j < q; ++j) {
      r.x(p * q + j) = a + 0.5 * (b - a) * (g.t(j) + 1.0);
      r.w(p * q + j) = 0.5 * (b - a) * g.w(j);
    }
  }
  return r;
}

std::vector<double> uniform_edges(double a, double b, double h) {
  int n = std::max(1, static_cast<int>(std::ceil((b - a) / h - 1e-9)));
  std::vector<double> e(n + 1);
  for (int i = 0; i <= n; ++i) e[i] = a + (b - a) * i / n;
  e[n] = b;
  return e;
}

cplx integrate_adaptive(const std::function<cplx(double)>& f, double a,
                        double b, double rel_tol, double* err_est,
                        unsigned max_depth) {
  double err = 0.0;
  cplx r = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, max_depth, rel_tol, &err);
  if (err_est) *err_est = err;
  return r;
}

}  // namespace hl
