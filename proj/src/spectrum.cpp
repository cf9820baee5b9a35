#include "halfline/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>

#include <boost/math/tools/minima.hpp>

#include "halfline/jost.hpp"
#include "halfline/parallel.hpp"
#include "halfline/quadrature.hpp"

namespace hl {

namespace {

std::pair<cplx, cplx> e_and_prime(const Potential& P, cplx k) {
  JostOptions o;
  o.derivative = true;
  JostData d = jost_data(P, k, VecR(), o);
  return {d.e0, d.e0_prime};
}

bool is_zero_residual(cplx e, cplx ep) { return std::abs(e) <= 1e-10 * (1.0 + std::abs(ep)); }

// Newton iteration for e(k) = 0 from k, confined to box (with a small margin).
bool newton(const Potential& P, cplx& k, const Rect* box, double* residual) {
  for (int it = 0; it < 60; ++it) {
    auto [e, ep] = e_and_prime(P, k);
    if (is_zero_residual(e, ep)) {
      if (residual) *residual = std::abs(e);
      if (!box) return true;
      double mx = 1e-6 * (box->re_hi - box->re_lo), my = 1e-6 * (box->im_hi - box->im_lo);
      return k.real() >= box->re_lo - mx && k.real() <= box->re_hi + mx &&
             k.imag() >= box->im_lo - my && k.imag() <= box->im_hi + my;
    }
    if (ep == cplx(0.0, 0.0)) return false;
    cplx step = e / ep;
    // Damp steps that leave the box by far.
    if (box && std::abs(step) > 2.0 * (box->re_hi - box->re_lo + box->im_hi - box->im_lo))
      step *= 0.25;
    k -= step;
    if (k.imag() < 0.0 || k == cplx(0.0, 0.0)) return false;
  }
  return false;
}

void locate_in(const Potential& P, const Rect& r, int count, const SpectrumOptions& opt,
               SpectralReport& out, int depth) {
  if (count == 0) return;
  const double w = r.re_hi - r.re_lo, h = r.im_hi - r.im_lo;
  if (count == 1 || std::max(w, h) < opt.min_box || depth > 40) {
    cplx k(0.5 * (r.re_lo + r.re_hi), 0.5 * (r.im_lo + r.im_hi));
    double res = 0.0;
    if (newton(P, k, &r, &res)) {
      out.eigen_k.push_back({k, count, res});
      if (count > 1) out.multiplicity_above_one = true;
      return;
    }
    if (std::max(w, h) < opt.min_box || depth > 40) {
      throw Error(ErrorKind::QuadratureNotConverged, "Newton refinement failed in a minimal box");
    }
  }
  // Split slightly off-centre so that split lines rarely hit symmetric zeros.
  const double xm = r.re_lo + 0.5 * w + 0.0137 * w, ym = r.im_lo + 0.5 * h + 0.0121 * h;
  Rect parts[4] = {{r.re_lo, xm, r.im_lo, ym},
                   {xm, r.re_hi, r.im_lo, ym},
                   {r.re_lo, xm, ym, r.im_hi},
                   {xm, r.re_hi, ym, r.im_hi}};
  int total = 0;
  for (const Rect& p : parts) {
    int c = count_zeros(P, p, opt).count;
    total += c;
    locate_in(P, p, c, opt, out, depth + 1);
  }
  if (total != count)
    throw Error(ErrorKind::QuadratureNotConverged, "sub-box counts do not add up");
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::SimilarToFree: return "similar_to_free";
    case Verdict::HasDiscreteSpectrum: return "has_discrete_spectrum";
    case Verdict::HasSpectralSingularities: return "has_spectral_singularities";
    case Verdict::Undetermined: return "undetermined";
  }
  return "undetermined";
}

CountResult count_zeros(const Potential& P, const Rect& region, const SpectrumOptions& opt) {
  if (!(region.im_lo > 0.0) || region.re_hi <= region.re_lo || region.im_hi <= region.im_lo)
    throw Error(ErrorKind::Input, "counting region must lie strictly inside the upper half-plane");
  const cplx z[5] = {{region.re_lo, region.im_lo},
                     {region.re_hi, region.im_lo},
                     {region.re_hi, region.im_hi},
                     {region.re_lo, region.im_hi},
                     {region.re_lo, region.im_lo}};
  CountResult r;
  r.min_abs_e = std::numeric_limits<double>::infinity();
  const int samples = 48;
  for (int s = 0; s < 4; ++s)
    for (int j = 0; j < samples; ++j)
      r.min_abs_e = std::min(
          r.min_abs_e, std::abs(jost_function(P, z[s] + (z[s + 1] - z[s]) * (double(j) / samples))));
  if (r.min_abs_e < opt.contour_min_abs)
    throw Error(ErrorKind::ZeroOnContour, "e(k) nearly vanishes on the counting contour");
  cplx total = 0.0;
  for (int s = 0; s < 4; ++s) {
    const cplx a = z[s], d = z[s + 1] - z[s];
    double err = 0.0;
    total += integrate_adaptive(
        [&](double t) {
          auto [e, ep] = e_and_prime(P, a + d * t);
          return ep / e * d;
        },
        0.0, 1.0, opt.quad_tol, &err);
  }
  cplx n = total / (2.0 * kPi * kI);
  r.raw = n.real();
  r.count = static_cast<int>(std::lround(r.raw));
  if (std::abs(r.raw - r.count) > 0.1 || std::abs(n.imag()) > 0.1)
    throw Error(ErrorKind::QuadratureNotConverged, "winding number is not close to an integer");
  return r;
}

double certified_radius(const Potential& P) {
  const double target = std::log(1.5);
  if (first_moment(P) <= target) return 0.0;
  auto B = [&](double r) {
    return P.weighted_abs_integral(0.0, std::numeric_limits<double>::infinity(),
                                   [r](double t) { return std::min(t, 1.0 / r); });
  };
  double hi = 1.0;
  while (B(hi) > target) hi *= 2.0;
  double lo = hi / 2.0;
  while (B(lo) <= target && lo > 1e-12) lo /= 2.0;
  for (int it = 0; it < 60 && hi - lo > 1e-10 * hi; ++it) {
    double m = std::sqrt(lo * hi);
    (B(m) > target ? lo : hi) = m;
  }
  return hi;
}

SpectralReport locate_eigenvalues(const Potential& P, const Rect& region,
                                  const SpectrumOptions& opt) {
  SpectralReport rep;
  rep.region = region;
  rep.count = count_zeros(P, region, opt).count;
  locate_in(P, region, rep.count, opt, rep, 0);
  std::sort(rep.eigen_k.begin(), rep.eigen_k.end(), [](const EigenK& a, const EigenK& b) {
    return a.k.imag() > b.k.imag() || (a.k.imag() == b.k.imag() && a.k.real() < b.k.real());
  });
  for (const EigenK& z : rep.eigen_k) rep.eigenvalues.push_back(z.k * z.k);
  return rep;
}

std::vector<Singularity> scan_singularities(const Potential& P, double k_max,
                                            double threshold, const SpectrumOptions& opt) {
  std::vector<Singularity> out;
  if (!(k_max > opt.k_min)) return out;
  const int m = static_cast<int>(std::ceil((k_max - opt.k_min) / opt.scan_step)) + 1;
  for (int sgn : {-1, 1}) {
    std::vector<double> ks(m), ae(m);
    for (int j = 0; j < m; ++j) ks[j] = sgn * std::min(k_max, opt.k_min + j * opt.scan_step);
    parallel_for(m, [&](int j) { ae[j] = std::abs(jost_function(P, ks[j])); });
    for (int j = 0; j < m; ++j) {
      bool left = j == 0 || ae[j] <= ae[j - 1];
      bool right = j == m - 1 || ae[j] <= ae[j + 1];
      if (!(left && right)) continue;
      double a = ks[std::max(0, j - 1)], b = ks[std::min(m - 1, j + 1)];
      if (a > b) std::swap(a, b);
      auto f = [&](double k) { return std::abs(jost_function(P, k)); };
      auto [kb, fb] = boost::math::tools::brent_find_minima(f, a, b, 50);
      if (fb >= threshold) continue;
      Singularity s;
      s.k = kb;
      s.abs_e = fb;
      // Brent only resolves kb to about sqrt(eps); polish with Newton in the
      // plane and accept the zero when it stays on the axis.
      cplx z = kb;
      for (int it = 0; it < 20 && !s.confirmed; ++it) {
        auto [e, ep] = e_and_prime(P, z);
        if (is_zero_residual(e, ep)) {
          s.confirmed = std::abs(z.imag()) <= 1e-8 * std::max(1.0, std::abs(z));
          break;
        }
        if (ep == cplx(0.0, 0.0)) break;
        z -= e / ep;
        if (z.imag() < 0.0) z = z.real();
      }
      if (s.confirmed) {
        s.k = z.real();
        s.abs_e = std::abs(jost_function(P, s.k));
      }
      out.push_back(s);
    }
  }
  std::sort(out.begin(), out.end(), [](const Singularity& a, const Singularity& b) { return a.k < b.k; });
  return out;
}

Verdict similarity_verdict(const SpectralReport& r) {
  if (!r.region_certified) return Verdict::Undetermined;
  for (const Singularity& s : r.singularity_scan)
    if (s.confirmed) return Verdict::HasSpectralSingularities;
  if (!r.eigen_k.empty()) return Verdict::HasDiscreteSpectrum;
  if (!r.near_axis.empty() || !r.singularity_scan.empty()) return Verdict::Undetermined;
  return Verdict::SimilarToFree;
}

SpectralReport spectral_report(const Potential& P, const SpectrumOptions& opt) {
  SpectralReport rep;
  const double moment = first_moment(P);
  const double r = certified_radius(P);
  if (r == 0.0) {
    rep.kato_moment = moment;
    rep.region_certified = true;
    rep.barrier_ok = true;
    rep.verdict = similarity_verdict(rep);
    return rep;
  }
  const double R = 1.05 * r;
  double barrier = 0.0;
  for (int j = 0; j <= 64; ++j) {
    cplx k = std::polar(R, kPi * j / 64.0);
    barrier = std::max(barrier, std::abs(jost_function(P, k) - 1.0));
  }
  rep = locate_eigenvalues(P, {-R, R, opt.delta, R}, opt);
  rep.kato_moment = moment;
  rep.certified_radius = r;
  rep.barrier_ok = barrier < 0.5;
  rep.region_certified = rep.barrier_ok;
  SpectralReport strip = locate_eigenvalues(P, {-R, R, 0.1 * opt.delta, opt.delta}, opt);
  for (const EigenK& z : strip.eigen_k) rep.near_axis.push_back(z.k);
  rep.singularity_scan = scan_singularities(P, R, opt.scan_threshold, opt);
  rep.verdict = similarity_verdict(rep);
  return rep;
}

TunedSingularity tune_singularity(double v0, double a, double k_range) {
  auto e_of = [&](double th, double k) {
    return jost_function(Potential::step(std::polar(v0, th), a), k);
  };
  TunedSingularity best;
  best.v0 = v0;
  best.abs_e = std::numeric_limits<double>::infinity();
  const int nt = 60, nk = 241;
  std::vector<double> vals(nt * nk);
  parallel_for(nt, [&](int i) {
    double th = 0.05 + (kPi - 0.1) * i / (nt - 1);
    for (int j = 0; j < nk; ++j) {
      double k = -k_range + 2.0 * k_range * j / (nk - 1);
      vals[i * nk + j] = std::abs(k) < 1e-3 ? std::numeric_limits<double>::infinity()
                                            : std::abs(e_of(th, k));
    }
  });
  for (int i = 0; i < nt; ++i)
    for (int j = 0; j < nk; ++j)
      if (vals[i * nk + j] < best.abs_e) {
        best.abs_e = vals[i * nk + j];
        best.theta = 0.05 + (kPi - 0.1) * i / (nt - 1);
        best.k = -k_range + 2.0 * k_range * j / (nk - 1);
      }
  // Two real unknowns (theta, k), one complex equation.
  double th = best.theta, k = best.k;
  for (int it = 0; it < 50; ++it) {
    Potential V = Potential::step(std::polar(v0, th), a);
    auto [e, ek] = e_and_prime(V, k);
    if (std::abs(e) < 1e-14) break;
    const double h = 1e-6;
    cplx et = (e_of(th + h, k) - e_of(th - h, k)) / (2.0 * h);
    Eigen::Matrix2d J;
    J << et.real(), ek.real(), et.imag(), ek.imag();
    Eigen::Vector2d rhs(e.real(), e.imag());
    Eigen::Vector2d d = J.colPivHouseholderQr().solve(rhs);
    th -= d(0);
    k -= d(1);
    if (d.norm() < 1e-15 * (1.0 + std::abs(k))) break;
  }
  best.theta = th;
  best.k = k;
  best.abs_e = std::abs(e_of(th, k));
  best.converged = best.abs_e < 1e-10;
  return best;
}

double eigen_onset_depth(double a, double lo, double hi, double tol, const SpectrumOptions& opt) {
  auto count = [&](double v) {
    return count_zeros(Potential::step(-v, a), {-2.0, 2.0, opt.delta, 3.0}, opt).count;
  };
  if (count(lo) != 0 || count(hi) < 1)
    throw Error(ErrorKind::Input, "onset bracket does not change the zero count");
  while (hi - lo > tol) {
    double m = 0.5 * (lo + hi);
    (count(m) == 0 ? lo : hi) = m;
  }
  return 0.5 * (lo + hi);
}

}  // namespace hl
