#include "halfline/riesz.hpp"

#include <algorithm>
#include <cmath>

#include "halfline/jost.hpp"
#include "halfline/opcalc.hpp"
#include "halfline/parallel.hpp"
#include "halfline/quadrature.hpp"
#include "halfline/testspace.hpp"

namespace hl {

namespace {

VecC sample_v(const Potential& P, const VecR& x) {
  VecC v(x.size());
  for (int i = 0; i < x.size(); ++i) v(i) = P(x(i));
  return v;
}

// Lambda nodes for the commutator integral on (-Lambda, Lambda).
void lambda_nodes(double eps, const CommutatorOptions& opt, std::vector<double>& lam,
                  std::vector<double>& wt) {
  const GaussRule& gr = gauss_legendre(opt.q);
  std::vector<double> edges{0.0};
  double h = eps / 4.0;
  while (edges.back() < opt.Lambda) {
    edges.push_back(std::min(opt.Lambda, edges.back() + h));
    h *= 1.5;
  }
  for (size_t p = 0; p + 1 < edges.size(); ++p) {
    double a = edges[p], b = edges[p + 1];
    for (int j = 0; j < opt.q; ++j) {
      lam.push_back(-(a + 0.5 * (b - a) * (gr.t(j) + 1.0)));
      wt.push_back(0.5 * (b - a) * gr.w(j));
    }
  }
  const double K = std::sqrt(opt.Lambda);
  std::vector<double> ke{0.0};
  h = std::sqrt(eps) / 4.0;
  while (ke.back() < K) {
    ke.push_back(std::min(K, ke.back() + std::min(h, opt.dk)));
    h *= 1.5;
  }
  for (size_t p = 0; p + 1 < ke.size(); ++p) {
    double a = ke[p], b = ke[p + 1];
    for (int j = 0; j < opt.q; ++j) {
      double kk = a + 0.5 * (b - a) * (gr.t(j) + 1.0);
      lam.push_back(kk * kk);
      wt.push_back(2.0 * kk * 0.5 * (b - a) * gr.w(j));
    }
  }
}

}  // namespace

MatC RankOneSum::apply(const MatC& u) const {
  MatC out = MatC::Zero(u.rows(), u.cols());
  for (size_t t = 0; t < f.size(); ++t) {
    Eigen::RowVectorXcd coef = (f[t].array() * w.array().cast<cplx>()).matrix().transpose() * u;
    out += f[t] * (coef / c[t]);
  }
  return out;
}

MatC RankOneSum::apply_complement(const MatC& u) const { return u - apply(u); }

MatC RankOneSum::apply_adjoint(const MatC& u) const {
  MatC out = MatC::Zero(u.rows(), u.cols());
  for (size_t t = 0; t < f.size(); ++t) {
    VecC fc = f[t].conjugate();
    Eigen::RowVectorXcd coef = (fc.array() * w.array().cast<cplx>()).matrix().transpose() * u;
    out += fc * (coef / std::conj(c[t]));
  }
  return out;
}

MatC RankOneSum::dense() const {
  const int n = static_cast<int>(w.size());
  MatC out = MatC::Zero(n, n);
  for (size_t t = 0; t < f.size(); ++t)
    out += f[t] * (f[t].array() * w.array().cast<cplx>()).matrix().transpose() / c[t];
  return out;
}

RankOneSum rank_one_on(const Potential& P, const std::vector<cplx>& k0, const VecR& x,
                       const VecR& w, double x_max) {
  RankOneSum r;
  r.w = w;
  for (cplx k : k0) {
    JostData d = jost_data(P, k, x);
    VecC f(x.size());
    for (int i = 0; i < x.size(); ++i) f(i) = d.e(i);
    cplx c = (w.array().cast<cplx>() * f.array().square()).sum();
    c += std::exp(2.0 * kI * k * x_max) / (-2.0 * kI * k);
    double fn = (w.array() * f.array().abs2()).sum();
    if (std::abs(c) < 1e-8 * fn)
      throw Error(ErrorKind::JordanBlockDetected, "norming constant vanishes");
    r.f.push_back(f);
    r.c.push_back(c);
  }
  return r;
}

Eigenpair eigenpair(const Potential& P, cplx k0, const Grid& g) {
  if (!(k0.imag() > 0.0)) throw Error(ErrorKind::Input, "eigenpair needs Im k0 > 0");
  if (g.x_max() < P.support_hint())
    throw Error(ErrorKind::Input, "grid must cover the support of V for the tail correction");
  RankOneSum r = rank_one_on(P, {k0}, g.x(), g.w(), g.x_max());
  Eigenpair e;
  e.k0 = k0;
  e.mu = k0 * k0;
  e.f = r.f[0];
  e.g = e.f.conjugate();
  e.c = r.c[0];
  VecC v = sample_v(P, g.x());
  VecC res = -g.second_derivative(e.f) + (v.array() * e.f.array()).matrix() - e.mu * e.f;
  e.residual = g.norm(res) / g.norm(e.f);
  VecC ares = -g.second_derivative(e.g) + (v.conjugate().array() * e.g.array()).matrix() -
              std::conj(e.mu) * e.g;
  e.adjoint_residual = g.norm(ares) / g.norm(e.g);
  return e;
}

Projection projection_rank1(const std::vector<Eigenpair>& pairs, const Grid& g) {
  RankOneSum r;
  r.w = g.w();
  for (const Eigenpair& e : pairs) {
    r.f.push_back(e.f);
    r.c.push_back(e.c);
  }
  Projection p;
  p.matrix = r.dense();
  p.rank = static_cast<int>(pairs.size());
  p.source = "rank1";
  return p;
}

ContourSpec default_contour(cplx mu, ContourShape shape) {
  ContourSpec s;
  s.shape = shape;
  s.center = mu;
  double dist = mu.real() <= 0.0 ? std::abs(mu) : std::abs(mu.imag());
  s.radius = 0.75 * dist;
  s.half_height = 0.75 * dist;
  return s;
}

Projection projection_contour(const Potential& P, const ContourSpec& spec, const Grid& g) {
  if (!(spec.radius > 0.0)) throw Error(ErrorKind::Input, "contour radius must be positive");
  auto quad = [&](int n, std::vector<cplx>& lam, std::vector<cplx>& dl) {
    lam.clear();
    dl.clear();
    if (spec.shape == ContourShape::Circle) {
      for (int j = 0; j < n; ++j) {
        cplx z = std::polar(spec.radius, 2.0 * kPi * j / n);
        lam.push_back(spec.center + z);
        dl.push_back(kI * z * (2.0 * kPi / n));
      }
    } else {
      const cplx c[5] = {spec.center + cplx(-spec.radius, -spec.half_height),
                         spec.center + cplx(spec.radius, -spec.half_height),
                         spec.center + cplx(spec.radius, spec.half_height),
                         spec.center + cplx(-spec.radius, spec.half_height),
                         spec.center + cplx(-spec.radius, -spec.half_height)};
      // n nodes per side: the branch point 0 sits close to the right side.
      const GaussRule& gr = gauss_legendre(std::max(2, n));
      for (int s = 0; s < 4; ++s)
        for (int j = 0; j < gr.t.size(); ++j) {
          lam.push_back(c[s] + (c[s + 1] - c[s]) * (0.5 * (gr.t(j) + 1.0)));
          dl.push_back((c[s + 1] - c[s]) * (0.5 * gr.w(j)));
        }
    }
  };
  auto integrate = [&](int n) {
    std::vector<cplx> lam, dl;
    quad(n, lam, dl);
    std::vector<MatC> terms(lam.size());
    parallel_for(static_cast<int>(lam.size()), [&](int j) {
      cplx k = sqrt_upper(lam[j]);
      KernelData kd = kernel_data(P, k, Side::Full, g);
      if (std::abs(kd.e0) < spec.min_abs_e)
        throw Error(ErrorKind::ZeroOnContour, "contour passes through an eigenvalue");
      terms[j] = resolvent_matrix(g, kd) * dl[j];
    });
    MatC sum = MatC::Zero(g.size(), g.size());
    for (const MatC& t : terms) sum += t;  // fixed order
    return MatC(-sum / (2.0 * kPi * kI));
  };
  MatC P1 = integrate(spec.n_quad);
  MatC P2 = integrate(2 * spec.n_quad);
  if (g.op_norm(P2 - P1) > spec.tol * std::max(1.0, g.op_norm(P2)))
    throw Error(ErrorKind::QuadratureNotConverged, "contour quadrature changes under doubling");
  Projection p;
  p.matrix = P2;
  p.rank = static_cast<int>(std::lround(projection_trace(p).real()));
  p.source = "contour";
  return p;
}

double idempotence_defect(const Projection& p, const Grid& g) {
  return g.op_norm(p.matrix * p.matrix - p.matrix);
}

cplx projection_trace(const Projection& p) { return p.matrix.trace(); }

double commutation_defect(const Potential& P, const Projection& p, const Grid& g,
                          const MatC& Q) {
  VecC v = sample_v(P, g.x());
  auto L = [&](const MatC& u) {
    MatC out(u.rows(), u.cols());
    for (int c = 0; c < u.cols(); ++c)
      out.col(c) = -g.second_derivative(u.col(c)) + (v.array() * u.col(c).array()).matrix();
    return out;
  };
  MatC LQ = L(Q);
  MatC D = L(p.matrix * Q) - p.matrix * LQ;
  double pn = g.op_norm(p.matrix);
  if (pn == 0.0) return block_norm(g.w(), D);
  return block_norm(g.w(), D) / (pn * std::max(1.0, block_norm(g.w(), LQ)));
}

CommutatorResult commutator_identity_check(const Potential& P,
                                           const std::vector<Eigenpair>& pairs,
                                           const Grid& g, const CommutatorOptions& opt) {
  CommutatorResult res;
  const int n = g.size();
  Projection proj = projection_rank1(pairs, g);
  VecC v = sample_v(P, g.x());
  MatC Cm = proj.matrix * v.asDiagonal() - v.asDiagonal() * proj.matrix;
  {
    FactorPair F = factorize(P);
    VecC ba(n);
    for (int i = 0; i < n; ++i) ba(i) = std::conj(F.b(g.x(i))) * F.a(g.x(i));
    MatC Cf = proj.matrix * ba.asDiagonal() - ba.asDiagonal() * proj.matrix;
    res.symmetry_gap = (Cm - Cf).cwiseAbs().maxCoeff();
  }
  res.p_norm = g.op_norm(proj.matrix);
  // [P, V] = sum over pairs of u1 v1^T - u2 v2^T.
  const int r = static_cast<int>(pairs.size());
  MatC U(n, 2 * r), Vr(n, 2 * r);
  for (int t = 0; t < r; ++t) {
    const VecC& f = pairs[t].f;
    VecC fw = (f.array() * g.w().array().cast<cplx>()).matrix();
    U.col(2 * t) = f / pairs[t].c;
    Vr.col(2 * t) = (fw.array() * v.array()).matrix();
    U.col(2 * t + 1) = -(v.array() * f.array()).matrix() / pairs[t].c;
    Vr.col(2 * t + 1) = fw;
  }
  const Potential zero;
  for (double eps : opt.eps_ladder) {
    std::vector<double> lam, wt;
    lambda_nodes(eps, opt, lam, wt);
    const int m = static_cast<int>(lam.size());
    MatC A(n, 2 * r * m), B(n, 2 * r * m);
    parallel_for(m, [&](int l) {
      KernelData km = kernel_data(zero, sqrt_upper(cplx(lam[l], -eps)), Side::Free, g);
      KernelData kp = kernel_data(zero, sqrt_upper(cplx(lam[l], eps)), Side::Free, g);
      A.middleCols(2 * r * l, 2 * r) = wt[l] * resolvent_apply(g, km, U);
      B.middleCols(2 * r * l, 2 * r) = resolvent_apply_transpose(g, kp, Vr);
    });
    MatC M = A * B.transpose() / (2.0 * kPi * kI);
    if (opt.tail_correction) M += Cm / (kI * kPi * opt.Lambda);
    res.eps.push_back(eps);
    double d = g.op_norm(M - proj.matrix);
    res.D.push_back(res.p_norm > 0.0 ? d / res.p_norm : d);
    res.nodes.push_back(m);
  }
  for (size_t i = 1; i < res.D.size(); ++i)
    if (!(res.D[i] < res.D[i - 1])) res.decreasing = false;
  res.d_min = res.D.empty() ? 0.0 : res.D.back();
  return res;
}

}  // namespace hl
