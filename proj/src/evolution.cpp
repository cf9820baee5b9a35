#include "halfline/evolution.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include "halfline/opcalc.hpp"
#include "halfline/quadrature.hpp"

namespace hl {

namespace {

// FFTW planning is not thread-safe, execution with the new-array interface
// is. Plans are made once per size and kept for the process lifetime.
fftw_plan sine_plan(int M) {
  static std::mutex m;
  static std::map<int, fftw_plan> plans;
  std::lock_guard<std::mutex> lk(m);
  auto it = plans.find(M);
  if (it != plans.end()) return it->second;
  std::vector<double> buf(M);
  fftw_plan p = fftw_plan_r2r_1d(M, buf.data(), buf.data(), FFTW_RODFT00,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans.emplace(M, p);
  return p;
}

void rodft(VecR& u) {
  fftw_plan p = sine_plan(static_cast<int>(u.size()));
  fftw_execute_r2r(p, u.data(), u.data());
}

double mass(const VecC& u) { return u.squaredNorm(); }

// Mean of fn(V) over each cell [x_n - h/2, x_n + h/2], split at breakpoints.
template <class F>
VecC cell_mean(const Potential& P, const UniformGrid& ug, F fn) {
  std::vector<double> br = P.breakpoints();
  const GaussRule& g = gauss_legendre(8);
  VecC v(ug.M);
  for (int n = 0; n < ug.M; ++n) {
    double a = ug.x(n) - 0.5 * ug.h, b = std::min(ug.X, ug.x(n) + 0.5 * ug.h);
    std::vector<double> cuts{a};
    for (double p : br)
      if (p > a && p < b) cuts.push_back(p);
    cuts.push_back(b);
    cplx s = 0.0;
    for (size_t j = 0; j + 1 < cuts.size(); ++j) {
      double l = cuts[j], r = cuts[j + 1];
      for (int q = 0; q < g.t.size(); ++q)
        s += 0.5 * (r - l) * g.w(q) * fn(P(0.5 * (l + r) + 0.5 * (r - l) * g.t(q)));
    }
    v(n) = s / (b - a);
  }
  return v;
}

}  // namespace

UniformGrid::UniformGrid(double x_max, int nodes) : X(x_max), M(nodes - 1) {
  if (nodes < 64) throw Error(ErrorKind::Input, "uniform grid needs at least 64 nodes");
  if (!(x_max > 0.0)) throw Error(ErrorKind::Input, "uniform grid needs X > 0");
  h = X / (M + 1);
  x.resize(M);
  k.resize(M);
  for (int n = 0; n < M; ++n) {
    x(n) = (n + 1) * h;
    k(n) = (n + 1) * kPi / X;
  }
  w = VecR::Constant(M, h);
}

double UniformGrid::norm(const VecC& u) const { return std::sqrt(h * u.squaredNorm()); }

VecC dst(const VecC& u) {
  VecR re = u.real(), im = u.imag();
  rodft(re);
  rodft(im);
  VecC out(u.size());
  out.real() = re;
  out.imag() = im;
  return out;
}

VecC idst(const VecC& c) { return dst(c) / (2.0 * (c.size() + 1)); }

double high_band_fraction(const UniformGrid& ug, const VecC& u, double frac) {
  VecC c = dst(u);
  double total = mass(c);
  if (total == 0.0) return 0.0;
  int cut = static_cast<int>(std::floor(frac * (ug.M + 1)));
  return c.tail(std::max(0, ug.M - cut)).squaredNorm() / total;
}

VecC free_evolve(const UniformGrid& ug, const VecC& phi, double t, double alias_tol) {
  VecC c = dst(phi);
  double total = mass(c);
  int cut = static_cast<int>(std::floor(0.8 * (ug.M + 1)));
  if (total > 0.0 && c.tail(std::max(0, ug.M - cut)).squaredNorm() > alias_tol * total)
    throw Error(ErrorKind::AliasingDetected, "spectral mass above 0.8 k_Nyquist");
  if (t == 0.0) return phi;
  for (int n = 0; n < ug.M; ++n) c(n) *= std::exp(kI * t * ug.k(n) * ug.k(n));
  return idst(c);
}

VecC cell_average(const Potential& P, const UniformGrid& ug) {
  return cell_mean(P, ug, [](cplx v) { return v; });
}

Propagator::Propagator(const Potential& P, UniformGrid ug, SplitStepOptions opt)
    : P_(P), ug_(std::move(ug)), opt_(opt), v_(cell_average(P_, ug_)) {}

VecC Propagator::free(const VecC& phi, double t) const {
  return free_evolve(ug_, phi, t, opt_.alias_tol);
}

VecC Propagator::evolve_steps(const VecC& phi, double t, int steps) const {
  if (P_.is_zero()) return free(phi, t);
  const double dt = t / steps;
  VecC half = (kI * 0.5 * dt * v_.array()).exp().matrix();
  VecC mult(ug_.M);
  for (int n = 0; n < ug_.M; ++n) mult(n) = std::exp(kI * dt * ug_.k(n) * ug_.k(n));
  const double scale = 1.0 / (2.0 * (ug_.M + 1));
  VecC u = phi;
  for (int s = 0; s < steps; ++s) {
    u = half.cwiseProduct(u);
    VecC c = dst(u);
    c = mult.cwiseProduct(c) * scale;
    u = half.cwiseProduct(dst(c));
  }
  return u;
}

VecC Propagator::evolve(const VecC& phi, double t) const {
  if (high_band_fraction(ug_, phi) > opt_.alias_tol)
    throw Error(ErrorKind::AliasingDetected, "input has spectral mass above 0.8 k_Nyquist");
  if (t == 0.0) return phi;
  int steps = std::max(1, static_cast<int>(std::ceil(std::abs(t) / opt_.dt_max - 1e-9)));
  VecC u = evolve_steps(phi, t, steps);
  if (opt_.check_step && !P_.is_zero()) {
    VecC fine = evolve_steps(phi, t, 2 * steps);
    double pn = ug_.norm(phi);
    if (ug_.norm(fine - u) > opt_.step_tol * pn)
      throw Error(ErrorKind::StepTooLarge, "halving the time step changes the result");
    u = fine;
  }
  if (high_band_fraction(ug_, u) > opt_.alias_tol)
    throw Error(ErrorKind::AliasingDetected, "evolved state has mass above 0.8 k_Nyquist");
  return u;
}

MatC uniform_hamiltonian(const Potential& P, const UniformGrid& ug) {
  const int M = ug.M;
  MatR S(M, M);
  for (int j = 0; j < M; ++j)
    for (int n = 0; n < M; ++n)
      S(j, n) = std::sin(kPi * (j + 1.0) * (n + 1.0) / (M + 1.0));
  MatR T = S * ug.k.array().square().matrix().asDiagonal() * S * (2.0 / (M + 1.0));
  MatC L = T.cast<cplx>();
  L.diagonal() += cell_average(P, ug);
  return L;
}

VecC resolvent_power_evolve(const Potential& P, const UniformGrid& ug, const VecC& phi,
                            double t, int n) {
  if (n < 1) throw Error(ErrorKind::Input, "resolvent power needs n >= 1");
  MatC A = -kI * (t / n) * uniform_hamiltonian(P, ug);
  A.diagonal().array() += 1.0;
  Eigen::PartialPivLU<MatC> lu(A);
  VecC u = phi;
  for (int j = 0; j < n; ++j) u = lu.solve(u);
  return u;
}

double suggest_x_max(const UniformGrid& ug, const VecC& phi, double t_max) {
  auto quantile = [](const VecR& m, double q) {
    double total = m.sum(), acc = 0.0;
    for (int i = 0; i < m.size(); ++i) {
      acc += m(i);
      if (acc >= q * total) return i;
    }
    return static_cast<int>(m.size()) - 1;
  };
  VecR mx = phi.cwiseAbs2();
  VecR mk = dst(phi).cwiseAbs2();
  double xq = ug.x(quantile(mx, 1.0 - 1e-6));
  double kq = ug.k(quantile(mk, 1.0 - 1e-6));
  return (xq + 2.0 * kq * t_max) / 0.9;
}

void check_domain(const UniformGrid& ug, const VecC& u, double tol, double x_hint) {
  double total = mass(u);
  if (total == 0.0) return;
  double edge = 0.0;
  for (int n = 0; n < ug.M; ++n)
    if (ug.x(n) > 0.9 * ug.X) edge += std::norm(u(n));
  if (edge > tol * total) {
    std::ostringstream os;
    os.precision(4);
    os << "packet reaches the right edge (mass fraction " << edge / total
       << "); suggested X_max " << x_hint;
    throw Error(ErrorKind::DomainEscape, os.str());
  }
}

NonstationaryResult nonstationary_check(const Propagator& prop, const RankOneSum& proj,
                                        const VecC& phi, const VecC& w_phi, const VecC& z_phi,
                                        const NonstationaryOptions& opt) {
  const UniformGrid& ug = prop.grid();
  NonstationaryResult r;
  r.phi_norm = ug.norm(phi);
  double tmax = *std::max_element(opt.t_ladder.begin(), opt.t_ladder.end());
  double hint = suggest_x_max(ug, phi, tmax);
  VecC phic = proj.empty() ? phi : VecC(proj.apply_complement(phi));
  for (double t : opt.t_ladder) {
    VecC a = prop.free(phi, -t);
    check_domain(ug, a, opt.escape_tol, hint);
    if (!proj.empty()) a = proj.apply_complement(a);
    VecC wt = prop.evolve(a, t);
    VecC b = prop.evolve(phic, -t);
    check_domain(ug, b, opt.escape_tol, hint);
    VecC zt = prop.free(b, t);
    r.t.push_back(t);
    r.w_defect.push_back(ug.norm(wt - w_phi) / r.phi_norm);
    r.z_defect.push_back(ug.norm(zt - z_phi) / r.phi_norm);
  }
  // Decrease is required only above the roundoff level of the propagator.
  constexpr double floor = 1e-12;
  for (size_t i = 1; i < r.t.size(); ++i) {
    if (!(r.w_defect[i] < r.w_defect[i - 1]) && r.w_defect[i] > floor) r.w_monotone = false;
    if (!(r.z_defect[i] < r.z_defect[i - 1]) && r.z_defect[i] > floor) r.z_monotone = false;
  }
  return r;
}

SemigroupResult semigroup_check(const Propagator& prop, const SpectralWaveOps& ops,
                                const MatC& tests, double t, double s) {
  const UniformGrid& ug = prop.grid();
  const RankOneSum& pr = ops.projection();
  auto comp = [&](const MatC& u) { return pr.empty() ? u : MatC(pr.apply_complement(u)); };
  MatC Wq = ops.W(tests);
  MatC wuz = ops.W_U0_Z(tests, t);
  MatC U0 = tests;
  for (int c = 0; c < tests.cols(); ++c) U0.col(c) = prop.free(tests.col(c), t);
  MatC WU0 = ops.W(U0);
  MatC uc = comp(tests);
  MatC uw = comp(Wq);
  SemigroupResult r;
  for (int c = 0; c < tests.cols(); ++c) {
    double pn = ug.norm(tests.col(c));
    VecC ts = prop.evolve(uc.col(c), t + s);
    VecC st = prop.evolve(comp(prop.evolve(uc.col(c), s)), t);
    VecC ut = prop.evolve(uc.col(c), t);
    VecC uvw = prop.evolve(uw.col(c), t);
    r.composition = std::max(r.composition, ug.norm(ts - st) / pn);
    r.similarity = std::max(r.similarity, ug.norm(ut - wuz.col(c)) / pn);
    r.intertwining = std::max(r.intertwining, ug.norm(uvw - WU0.col(c)) / pn);
  }
  return r;
}

LaplaceResult laplace_check(const Propagator& prop, const RankOneSum& proj, const VecC& phi,
                            const VecC& target, cplx lambda, const std::vector<double>& T,
                            double dt) {
  const UniformGrid& ug = prop.grid();
  std::vector<int> marks;
  for (double t : T) {
    int m = static_cast<int>(std::lround(t / dt));
    if (m % 2) ++m;
    marks.push_back(m);
  }
  const int last = *std::max_element(marks.begin(), marks.end());
  VecC u = proj.empty() ? phi : VecC(proj.apply_complement(phi));
  VecC acc = u;  // Simpson weight 1 at t = 0
  LaplaceResult r;
  const double tn = ug.norm(target);
  std::map<int, VecC> done;
  for (int n = 1; n <= last; ++n) {
    u = prop.evolve(u, dt);
    VecC f = std::exp(kI * lambda * (n * dt)) * u;
    if (n % 2 == 0) {
      done[n] = (dt / 3.0) * (acc + f);
      acc += 2.0 * f;
    } else {
      acc += 4.0 * f;
    }
  }
  for (size_t i = 0; i < T.size(); ++i) {
    r.T.push_back(marks[i] * dt);
    r.defect.push_back(ug.norm(done[marks[i]] - target) / tn);
  }
  return r;
}

VecC laplace_target(const Potential& P, const Grid& g, const RankOneSum& proj_g,
                    const VecC& phi_g, cplx z, const VecR& x_out) {
  KernelData kd = kernel_data(P, sqrt_upper(z), Side::Full, g);
  VecC u = proj_g.empty() ? phi_g : VecC(proj_g.apply_complement(phi_g));
  VecC y = kI * resolvent_apply(g, kd, u);
  return g.interpolate(y, x_out);
}

CookResult cook_tail(const Potential& P, const UniformGrid& ug, const VecC& phi, double t_max,
                     double dt, const std::vector<double>& s) {
  VecR a2 = cell_mean(P, ug, [](cplx v) { return cplx(std::abs(v)); }).real();
  int m = static_cast<int>(std::lround(t_max / dt));
  if (m % 2) ++m;
  VecC c0 = dst(phi);
  const double scale = 1.0 / (2.0 * (ug.M + 1));
  std::vector<double> f(m + 1);
  for (int n = 0; n <= m; ++n) {
    VecC c = c0;
    double t = -n * dt;
    for (int j = 0; j < ug.M; ++j) c(j) *= std::exp(kI * t * ug.k(j) * ug.k(j));
    VecC u = dst(c) * scale;
    f[n] = ug.h * (a2.array() * u.array().abs2()).sum();
  }
  // Simpson partial integrals from each even index to m.
  std::vector<double> tail(m + 1, 0.0);
  for (int n = m - 2; n >= 0; n -= 2) tail[n] = tail[n + 2] + dt / 3.0 * (f[n] + 4.0 * f[n + 1] + f[n + 2]);
  CookResult r;
  r.total = tail[0];
  for (double sv : s) {
    int i = static_cast<int>(std::lround(sv / dt));
    if (i % 2) ++i;
    i = std::min(i, m);
    r.s.push_back(i * dt);
    r.tail.push_back(tail[i]);
  }
  return r;
}

double eigenmode_defect(const Propagator& prop, const VecC& f, cplx mu, double t) {
  VecC u = prop.evolve(f, t);
  return prop.grid().norm(u - std::exp(kI * t * mu) * f) / prop.grid().norm(f);
}

}  // namespace hl
