#include "halfline/waveops.hpp"

#include <algorithm>
#include <cmath>

#include "halfline/jost.hpp"
#include "halfline/opcalc.hpp"
#include "halfline/parallel.hpp"
#include "halfline/quadrature.hpp"
#include "halfline/testspace.hpp"

namespace hl {

namespace {

constexpr int kBlock = 128;

VecC sample_v(const Potential& P, const VecR& x) {
  VecC v(x.size());
  for (int i = 0; i < x.size(); ++i) v(i) = P(x(i));
  return v;
}

MatC weighted(const VecR& w, const MatC& u) { return w.cast<cplx>().asDiagonal() * u; }

// Sums f(l) over lattice nodes in fixed-size chunks; the chunk results are
// added in index order so the total does not depend on the thread count.
MatC lattice_sum(int m, long rows, long cols, const std::function<MatC(int)>& f) {
  MatC total = MatC::Zero(rows, cols);
  const int chunk = 32;
  for (int s = 0; s < m; s += chunk) {
    int e = std::min(m, s + chunk);
    std::vector<MatC> part(e - s);
    parallel_for(e - s, [&](int j) { part[j] = f(s + j); });
    for (const MatC& p : part) total += p;
  }
  return total;
}

}  // namespace

KappaRule kappa_rule(double kappa_max, double panel, int q) {
  std::vector<double> edges = uniform_edges(0.0, kappa_max, panel);
  PanelRule r = panel_rule(edges, q);
  return {r.x, r.w};
}

SpectralWaveOps::SpectralWaveOps(const Potential& P, const RankOneSum& proj, VecR x, VecR w,
                                 KappaRule kr, double min_abs_e)
    : P_(P), proj_(proj), x_(std::move(x)), w_(std::move(w)), kr_(std::move(kr)) {
  const int K = static_cast<int>(kr_.kappa.size());
  em_.resize(K);
  ep_.resize(K);
  parallel_for(K, [&](int j) {
    em_(j) = jost_function(P_, -kr_.kappa(j));
    ep_(j) = jost_function(P_, kr_.kappa(j));
  });
  min_e_ = std::min(em_.cwiseAbs().minCoeff(), ep_.cwiseAbs().minCoeff());
  if (min_e_ < min_abs_e)
    throw Error(ErrorKind::NearSingularity, "|e(k)| nearly vanishes on the real axis");
}

void SpectralWaveOps::block(int k0, int k1, MatR& S, MatC& U, MatC& Vt) const {
  const int n = static_cast<int>(x_.size());
  S.resize(n, k1 - k0);
  U.resize(n, k1 - k0);
  Vt.resize(n, k1 - k0);
  parallel_for(k1 - k0, [&](int j) {
    const double kap = kr_.kappa(k0 + j);
    for (int i = 0; i < n; ++i) S(i, j) = std::sin(kap * x_(i));
    if (P_.is_zero()) {
      U.col(j) = S.col(j).cast<cplx>();
      Vt.col(j) = U.col(j);
      return;
    }
    JostData d = jost_data(P_, kap, x_);
    for (int i = 0; i < n; ++i) {
      cplx s = d.s(i);
      U(i, j) = kap * s / em_(k0 + j);
      Vt(i, j) = kap * s / ep_(k0 + j);
    }
  });
}

MatC SpectralWaveOps::W(const MatC& phi, bool project) const {
  if (P_.is_zero()) return phi;
  const int K = static_cast<int>(kr_.kappa.size());
  MatC wphi = weighted(w_, phi);
  MatC out = MatC::Zero(phi.rows(), phi.cols());
  MatR S;
  MatC U, Vt;
  for (int k0 = 0; k0 < K; k0 += kBlock) {
    int k1 = std::min(K, k0 + kBlock);
    block(k0, k1, S, U, Vt);
    VecR D = (2.0 / kPi) * kr_.weight.segment(k0, k1 - k0);
    MatC c = D.cast<cplx>().asDiagonal() * (S.transpose().cast<cplx>() * wphi);
    out += U * c;
  }
  return project ? proj_.apply_complement(out) : out;
}

MatC SpectralWaveOps::z_coefficients(const MatC& phi, bool project) const {
  const int K = static_cast<int>(kr_.kappa.size());
  MatC y = weighted(w_, project ? proj_.apply_complement(phi) : phi);
  MatC coef(K, phi.cols());
  MatR S;
  MatC U, Vt;
  for (int k0 = 0; k0 < K; k0 += kBlock) {
    int k1 = std::min(K, k0 + kBlock);
    block(k0, k1, S, U, Vt);
    VecR D = (2.0 / kPi) * kr_.weight.segment(k0, k1 - k0);
    coef.middleRows(k0, k1 - k0) = D.cast<cplx>().asDiagonal() * (Vt.transpose() * y);
  }
  return coef;
}

MatC SpectralWaveOps::synthesize(const MatC& coef) const {
  const int K = static_cast<int>(kr_.kappa.size());
  MatC out = MatC::Zero(x_.size(), coef.cols());
  for (int k0 = 0; k0 < K; k0 += kBlock) {
    int k1 = std::min(K, k0 + kBlock);
    MatR S(x_.size(), k1 - k0);
    for (int j = 0; j < k1 - k0; ++j)
      for (int i = 0; i < x_.size(); ++i) S(i, j) = std::sin(kr_.kappa(k0 + j) * x_(i));
    out += S.cast<cplx>() * coef.middleRows(k0, k1 - k0);
  }
  return out;
}

MatC SpectralWaveOps::Z(const MatC& phi) const {
  if (P_.is_zero()) return phi;
  return synthesize(z_coefficients(phi));
}

MatC SpectralWaveOps::W_from_coefficients(const MatC& coef) const {
  return W(synthesize(coef));
}

MatC SpectralWaveOps::WTZ(const MatC& phi) const {
  MatC c = z_coefficients(phi);
  for (int j = 0; j < c.rows(); ++j) c.row(j) *= kr_.kappa(j) * kr_.kappa(j);
  return W_from_coefficients(c);
}

MatC SpectralWaveOps::W_U0_Z(const MatC& phi, double t) const {
  MatC c = z_coefficients(phi);
  for (int j = 0; j < c.rows(); ++j) c.row(j) *= std::exp(kI * t * kr_.kappa(j) * kr_.kappa(j));
  return W_from_coefficients(c);
}

MatC boundary_trace(const Potential& P, const Grid& g, const RankOneSum& proj,
                    const MatC& phi, TraceKind kind, cplx z) {
  if (z == cplx(0.0, 0.0)) throw Error(ErrorKind::Input, "trace at lambda = 0");
  if (z.imag() < 0.0) throw Error(ErrorKind::Input, "trace needs Im lambda >= 0");
  FactorPair F = factorize(P);
  const int n = g.size();
  VecC mult(n);
  const bool a_side = kind == TraceKind::AR0 || kind == TraceKind::ARV;
  for (int i = 0; i < n; ++i) mult(i) = a_side ? cplx(F.a(g.x(i))) : F.b(g.x(i));
  cplx k = z.imag() == 0.0 && z.real() > 0.0 ? cplx(std::sqrt(z.real()), 0.0) : sqrt_upper(z);
  MatC y;
  switch (kind) {
    case TraceKind::AR0:
    case TraceKind::BR0Adj:
      y = resolvent_apply(g, kernel_data(P, k, Side::Free, g), phi);
      break;
    case TraceKind::ARV: {
      KernelData kd = kernel_data(P, k, Side::Full, g);
      if (std::abs(kd.e0) < 1e-10) throw Error(ErrorKind::NearSingularity, "e(k) vanishes on the lattice");
      y = resolvent_apply(g, kd, proj.apply_complement(phi));
      break;
    }
    case TraceKind::BRVAdj: {
      Potential Pc = P.conjugate();
      KernelData kd = kernel_data(Pc, k, Side::Full, g);
      if (std::abs(kd.e0) < 1e-10) throw Error(ErrorKind::NearSingularity, "e(k) vanishes on the lattice");
      y = resolvent_apply(g, kd, phi - proj.apply_adjoint(phi));
      break;
    }
  }
  return mult.asDiagonal() * y;
}

LambdaLattice lambda_lattice(double Lambda, double dk, int q, double eps) {
  LambdaLattice L;
  const GaussRule& gr = gauss_legendre(q);
  const double K = std::sqrt(Lambda);
  std::vector<double> ke{0.0};
  double h = eps > 0.0 ? std::sqrt(eps) / 4.0 : dk;
  while (ke.back() < K) {
    ke.push_back(std::min(K, ke.back() + std::min(h, dk)));
    h *= 1.5;
  }
  for (int sgn : {-1, 1})
    for (size_t p = 0; p + 1 < ke.size(); ++p) {
      double a = ke[p], b = ke[p + 1];
      for (int j = 0; j < q; ++j) {
        double kk = a + 0.5 * (b - a) * (gr.t(j) + 1.0);
        L.lambda.push_back(sgn * kk * kk);
        L.weight.push_back(2.0 * kk * 0.5 * (b - a) * gr.w(j));
      }
    }
  return L;
}

HardyLadder hardy_ladder(const Potential& P, const Grid& g, const RankOneSum& proj,
                         const VecC& phi, TraceKind kind, const std::vector<double>& eps,
                         double Lambda, double dk) {
  HardyLadder h;
  h.eps = eps;
  double emin = *std::min_element(eps.begin(), eps.end());
  LambdaLattice L = lambda_lattice(Lambda, dk, 10, emin);
  const int m = static_cast<int>(L.lambda.size());
  MatC prev;
  for (size_t s = 0; s < eps.size(); ++s) {
    MatC tr(g.size(), m);
    parallel_for(m, [&](int l) {
      tr.col(l) = boundary_trace(P, g, proj, phi, kind, cplx(L.lambda[l], eps[s]));
    });
    double l2 = 0.0, d2 = 0.0;
    for (int l = 0; l < m; ++l) {
      l2 += L.weight[l] * g.norm(tr.col(l)) * g.norm(tr.col(l));
      if (s > 0) {
        double d = g.norm(tr.col(l) - prev.col(l));
        d2 += L.weight[l] * d * d;
      }
    }
    h.l2.push_back(l2);
    if (s > 0) h.ms_diff.push_back(std::sqrt(d2));
    prev = std::move(tr);
  }
  const size_t n = h.l2.size();
  h.stable = n >= 2 && std::abs(h.l2[n - 1] - h.l2[n - 2]) <= 0.1 * h.l2[n - 1];
  h.ms_decreasing = true;
  for (size_t i = 1; i < h.ms_diff.size(); ++i)
    if (!(h.ms_diff[i] < h.ms_diff[i - 1])) h.ms_decreasing = false;
  return h;
}

double trace_energy(const Potential& P, const Grid& g, const VecC& phi, double Lambda,
                    double dk) {
  LambdaLattice L = lambda_lattice(Lambda, dk, 10);
  const int m = static_cast<int>(L.lambda.size());
  std::vector<double> e(m);
  RankOneSum none;
  parallel_for(m, [&](int l) {
    double nr = g.norm(boundary_trace(P, g, none, phi, TraceKind::AR0, L.lambda[l]));
    e[l] = L.weight[l] * nr * nr;
  });
  double s = 0.0;
  for (double v : e) s += v;
  return s / (2.0 * kPi);
}

MatC forms_W(const Potential& P, const Grid& g, const RankOneSum& proj, const MatC& Q,
             const FormsOptions& opt) {
  if (P.is_zero()) return Q;
  LambdaLattice L = lambda_lattice(opt.Lambda, opt.dk, opt.q);
  VecC v = sample_v(P, g.x());
  MatC acc = lattice_sum(static_cast<int>(L.lambda.size()), Q.rows(), Q.cols(), [&](int l) {
    double lam = L.lambda[l];
    cplx kp = lam > 0.0 ? cplx(std::sqrt(lam), 0.0) : cplx(0.0, std::sqrt(-lam));
    cplx km = lam > 0.0 ? -kp : kp;
    MatC y = resolvent_apply(g, kernel_data(P, kp, Side::Free, g), Q);
    y = v.asDiagonal() * y;
    return MatC(L.weight[l] * resolvent_apply(g, kernel_data(P, km, Side::Full, g), y));
  });
  MatC out = Q - acc / (2.0 * kPi * kI);
  if (opt.tail_correction) out += kI / (kPi * opt.Lambda) * (v.asDiagonal() * Q);
  return proj.apply_complement(out);
}

MatC forms_Z(const Potential& P, const Grid& g, const RankOneSum& proj, const MatC& Q,
             const FormsOptions& opt) {
  if (P.is_zero()) return Q;
  LambdaLattice L = lambda_lattice(opt.Lambda, opt.dk, opt.q);
  VecC v = sample_v(P, g.x());
  MatC Qc = proj.apply_complement(Q);
  MatC acc = lattice_sum(static_cast<int>(L.lambda.size()), Q.rows(), Q.cols(), [&](int l) {
    double lam = L.lambda[l];
    cplx kp = lam > 0.0 ? cplx(std::sqrt(lam), 0.0) : cplx(0.0, std::sqrt(-lam));
    cplx km = lam > 0.0 ? -kp : kp;
    MatC y = resolvent_apply(g, kernel_data(P, kp, Side::Full, g), Qc);
    y = v.asDiagonal() * y;
    return MatC(L.weight[l] * resolvent_apply(g, kernel_data(P, km, Side::Free, g), y));
  });
  MatC out = Qc + acc / (2.0 * kPi * kI);
  if (opt.tail_correction) out -= kI / (kPi * opt.Lambda) * (v.asDiagonal() * Qc);
  return out;
}

WaveDiagnostics verify_completeness(const SpectralWaveOps& ops, const MatC& Q) {
  WaveDiagnostics d;
  const VecR& w = ops.w();
  d.test_dim = static_cast<int>(Q.cols());
  MatC WQ = ops.W(Q);
  MatC ZQ = ops.Z(Q);
  d.zw_defect = block_norm(w, ops.Z(WQ) - Q);
  d.wz_defect = block_norm(w, ops.W(ZQ) - ops.projection().apply_complement(Q));
  d.w_minus_identity = block_norm(w, WQ - Q);
  d.w_norm = block_norm(w, WQ);
  // Both defects use the transforms without their I - P factor, which would
  // annihilate f_mu and g_mu by construction.
  const RankOneSum& pr = ops.projection();
  MatC WQraw = pr.empty() ? WQ : ops.W(Q, false);
  for (const VecC& f : pr.f) {
    double fn = block_norm(w, f);
    d.kernel_defect =
        std::max(d.kernel_defect, block_norm(w, ops.synthesize(ops.z_coefficients(f, false))) / fn);
    for (int c = 0; c < WQ.cols(); ++c) {
      cplx ip = (w.cast<cplx>().array() * WQraw.col(c).array() * f.array()).sum();
      d.range_defect = std::max(d.range_defect, std::abs(ip) / (fn * block_norm(w, Q.col(c))));
    }
  }
  return d;
}

double resolvent_norm(const Potential& P, cplx lambda, const Grid& g, int iters) {
  KernelData kd = kernel_data(P, sqrt_upper(lambda), Side::Full, g);
  const VecR& w = g.w();
  const int n = g.size();
  // R* R in the weighted metric: W^{-1} R^H W R.
  auto gram = [&](const VecC& x) {
    VecC y = resolvent_apply(g, kd, x);
    VecC wy = (w.cast<cplx>().array() * y.array()).matrix();
    VecC z = resolvent_apply_transpose(g, kd, wy.conjugate()).conjugate();
    return VecC((z.array() / w.cast<cplx>().array()).matrix());
  };
  // Lanczos with full reorthogonalisation; the largest Ritz value of the
  // Krylov block converges much faster than the plain power method when the
  // leading singular values are close.
  const int m = std::max(1, std::min(iters, n));
  MatC Q(n, m);
  VecC x(n);
  for (int i = 0; i < n; ++i) x(i) = 1.0 + 0.3 * std::sin(1.7 * g.x(i));
  Q.col(0) = x / g.norm(x);
  int used = 0;
  for (int j = 0; j < m; ++j) {
    used = j + 1;
    if (j + 1 == m) break;
    VecC z = gram(Q.col(j));
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i <= j; ++i) z -= g.inner(z, Q.col(i)) * Q.col(i);
    double nz = g.norm(z);
    if (nz <= 1e-14 * g.norm(Q.col(0))) break;
    Q.col(j + 1) = z / nz;
  }
  MatC H(used, used);
  for (int j = 0; j < used; ++j) {
    VecC z = gram(Q.col(j));
    for (int i = 0; i < used; ++i) H(i, j) = g.inner(z, Q.col(i));
  }
  H = 0.5 * (H + H.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<MatC> es(H, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

IntertwiningDiagnostics verify_intertwining(const Potential& P, const Grid& g,
                                            const SpectralWaveOps& ops, const MatC& Q,
                                            const std::vector<cplx>& lambdas) {
  IntertwiningDiagnostics r;
  const VecR& w = g.w();
  MatC WQ = ops.W(Q);
  const double wn = block_norm(w, WQ);
  for (cplx lam : lambdas) {
    cplx k = sqrt_upper(lam);
    KernelData kv = kernel_data(P, k, Side::Full, g);
    if (std::abs(kv.e0) < 1e-10) throw Error(ErrorKind::AtEigenvalue, "lambda is an eigenvalue");
    KernelData k0 = kernel_data(P, k, Side::Free, g);
    MatC A = resolvent_apply(g, kv, WQ);
    MatC B = ops.W(resolvent_apply(g, k0, Q));
    r.lambda.push_back(lam);
    r.defect.push_back(block_norm(w, A - B) / (resolvent_norm(P, lam, g) * wn));
  }
  // Ritz matrices of W T Z and (I - P) L_h (I - P) on the block.
  VecC v = sample_v(P, g.x());
  const RankOneSum& pr = ops.projection();
  MatC Qc = pr.apply_complement(Q);
  MatC LQ(Qc.rows(), Qc.cols());
  for (int c = 0; c < Qc.cols(); ++c)
    LQ.col(c) = -g.second_derivative(Qc.col(c)) + (v.array() * Qc.col(c).array()).matrix();
  LQ = pr.apply_complement(LQ);
  MatC Qh = Q.adjoint() * w.cast<cplx>().asDiagonal();
  MatC A1 = Qh * ops.WTZ(Q);
  MatC A2 = Qh * LQ;
  Eigen::JacobiSVD<MatC> s2(A2);
  Eigen::JacobiSVD<MatC> sd(A1 - A2);
  r.spectral_matrix_gap = sd.singularValues()(0) / s2.singularValues()(0);
  Eigen::ComplexEigenSolver<MatC> e1(A1, false), e2(A2, false);
  const VecC& l1 = e1.eigenvalues();
  const VecC& l2 = e2.eigenvalues();
  auto one_side = [](const VecC& a, const VecC& b) {
    double m = 0.0;
    for (int i = 0; i < a.size(); ++i) {
      double best = 1e300;
      for (int j = 0; j < b.size(); ++j) best = std::min(best, std::abs(a(i) - b(j)));
      m = std::max(m, best);
    }
    return m;
  };
  r.spectral_distance =
      std::max(one_side(l1, l2), one_side(l2, l1)) / std::max(1e-300, l2.cwiseAbs().maxCoeff());
  return r;
}

}  // namespace hl
