#include "halfline/jost.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hl {

namespace {

// Scaled transfer matrix of a cell of width h with constant potential v:
// [[c, sk], [m, c]] times e^{ikh}, plus k-derivatives of the scaled entries.
struct Cell {
  cplx c, sk, m;
  cplx dc, dsk, dm;
};

Cell make_cell(cplx k, cplx v, double h, bool deriv) {
  Cell t;
  const cplx kap2 = k * k - v;
  const cplx z2 = kap2 * h * h;
  const cplx ph = std::exp(kI * k * h);
  cplx dsk_dk2;  // d(sk)/d(kappa^2), scaled
  if (std::abs(z2) < 1e-6) {
    t.c = (1.0 - z2 / 2.0 + z2 * z2 / 24.0 - z2 * z2 * z2 / 720.0) * ph;
    t.sk = h * (1.0 - z2 / 6.0 + z2 * z2 / 120.0 - z2 * z2 * z2 / 5040.0) * ph;
    dsk_dk2 = h * h * h *
              (-1.0 / 6.0 + z2 / 60.0 - z2 * z2 / 2520.0 + z2 * z2 * z2 / 181440.0) * ph;
  } else {
    const cplx kap = sqrt_upper(kap2);
    const cplx ep = std::exp(kI * (k + kap) * h);
    const cplx em = std::exp(kI * (k - kap) * h);
    t.c = 0.5 * (ep + em);
    t.sk = (ep - em) / (2.0 * kI * kap);
    dsk_dk2 = (h * t.c - t.sk) / (2.0 * kap2);
  }
  t.m = -kap2 * t.sk;
  if (deriv) {
    t.dc = -h * k * t.sk + kI * h * t.c;
    t.dsk = 2.0 * k * dsk_dk2 + kI * h * t.sk;
    t.dm = -k * (t.sk + h * t.c) + kI * h * t.m;
  }
  return t;
}

struct Mesh {
  std::vector<double> pts;    // cell boundaries, increasing
  std::vector<int> out_index; // for each requested abscissa, index into pts
};

// Each interval between required points gets refine * ceil(len / h_sub)
// cells, so refinement levels nest exactly.
Mesh build_mesh(const Potential& P, const VecR& x, double x_start, double h_sub, int refine) {
  std::vector<double> pts{0.0, x_start};
  for (int i = 0; i < x.size(); ++i) pts.push_back(x(i));
  for (double b : P.breakpoints())
    if (b < x_start) pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const bool flat = P.piecewise_constant();
  std::vector<double> fine{pts.front()};
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    double a = pts[i], b = pts[i + 1];
    int m = 1;
    if (!flat) m = refine * std::max(1, static_cast<int>(std::ceil((b - a) / h_sub - 1e-9)));
    for (int j = 1; j < m; ++j) fine.push_back(a + (b - a) * j / m);
    fine.push_back(b);
  }
  Mesh mesh;
  mesh.pts = std::move(fine);
  mesh.out_index.resize(x.size());
  for (int i = 0; i < x.size(); ++i) {
    auto it = std::lower_bound(mesh.pts.begin(), mesh.pts.end(), x(i));
    mesh.out_index[i] = static_cast<int>(it - mesh.pts.begin());
  }
  return mesh;
}

struct Sweep {
  VecC s, ds, e, de;
  cplx e0, e0p;
};

Sweep sweep(const Potential& P, cplx k, const VecR& x, double x_start,
            double h_sub, bool deriv, int refine = 1) {
  Mesh mesh = build_mesh(P, x, x_start, h_sub, refine);
  const auto& pts = mesh.pts;
  const int n = static_cast<int>(pts.size());
  std::vector<Cell> cells(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    double a = pts[i], b = pts[i + 1];
    cells[i] = make_cell(k, P(0.5 * (a + b)), b - a, deriv);
  }
  // Forward sweep for the regular solution.
  std::vector<cplx> sy(n), sp(n);
  sy[0] = 0.0;
  sp[0] = 1.0;
  for (int i = 0; i + 1 < n; ++i) {
    const Cell& t = cells[i];
    sy[i + 1] = t.c * sy[i] + t.sk * sp[i];
    sp[i + 1] = t.m * sy[i] + t.c * sp[i];
  }
  // Backward sweep for the Jost solution, inverse cells [[c,-sk],[-m,c]].
  std::vector<cplx> ey(n), ep(n), dey(n), dep(n);
  ey[n - 1] = 1.0;
  ep[n - 1] = kI * k;
  dey[n - 1] = 0.0;
  dep[n - 1] = kI;
  for (int i = n - 2; i >= 0; --i) {
    const Cell& t = cells[i];
    ey[i] = t.c * ey[i + 1] - t.sk * ep[i + 1];
    ep[i] = -t.m * ey[i + 1] + t.c * ep[i + 1];
    if (deriv) {
      dey[i] = t.dc * ey[i + 1] - t.dsk * ep[i + 1] + t.c * dey[i + 1] - t.sk * dep[i + 1];
      dep[i] = -t.dm * ey[i + 1] + t.dc * ep[i + 1] - t.m * dey[i + 1] + t.c * dep[i + 1];
    }
  }
  Sweep out;
  const int m = static_cast<int>(x.size());
  out.s.resize(m);
  out.ds.resize(m);
  out.e.resize(m);
  out.de.resize(m);
  for (int i = 0; i < m; ++i) {
    int j = mesh.out_index[i];
    out.s(i) = sy[j];
    out.ds(i) = sp[j];
    out.e(i) = ey[j];
    out.de(i) = ep[j];
  }
  out.e0 = ey[0];
  out.e0p = dey[0];
  return out;
}

}  // namespace

JostData jost_data(const Potential& P, cplx k, const VecR& x, const JostOptions& opt) {
  if (k == cplx(0.0, 0.0)) throw Error(ErrorKind::Input, "k = 0 is excluded");
  if (k.imag() < 0.0) throw Error(ErrorKind::Input, "Jost data needs Im k >= 0");
  for (int i = 1; i < x.size(); ++i)
    if (x(i) < x(i - 1)) throw Error(ErrorKind::Input, "abscissae must increase");
  JostData d;
  d.k = k;
  d.x = x;
  double xv = P.support_hint(opt.tail_tol);
  d.x_start = std::max(xv, x.size() ? x(x.size() - 1) : 0.0);
  if (!P.compact()) {
    double b = P.weighted_abs_integral(
        d.x_start, std::numeric_limits<double>::infinity(),
        [k](double t) { return std::min(t, 1.0 / std::abs(k)); });
    d.tail_bound = std::expm1(b);
    if (d.tail_bound > opt.tail_tol)
      throw Error(ErrorKind::TailTooShort, "tail bound at the start point exceeds tolerance");
  }
  if (P.piecewise_constant()) {
    Sweep s = sweep(P, k, x, d.x_start, opt.h_sub, opt.derivative);
    d.s_sc = s.s;
    d.ds_sc = s.ds;
    d.e_sc = s.e;
    d.de_sc = s.de;
    d.e0 = s.e0;
    d.e0_prime = s.e0p;
  } else {
    // Midpoint cells are second order; two Richardson levels on h, h/2, h/4.
    Sweep a = sweep(P, k, x, d.x_start, opt.h_sub, opt.derivative);
    Sweep b = sweep(P, k, x, d.x_start, opt.h_sub, opt.derivative, 2);
    Sweep c = sweep(P, k, x, d.x_start, opt.h_sub, opt.derivative, 4);
    auto rich = [](auto fa, auto fb, auto fc) {
      auto r1 = (4.0 * fb - fa) / 3.0;
      auto r2 = (4.0 * fc - fb) / 3.0;
      return std::make_pair((16.0 * r2 - r1) / 15.0, r2 - r1);
    };
    auto [e0, e0d] = rich(a.e0, b.e0, c.e0);
    d.e0 = e0;
    d.err_est = std::abs(e0d);
    d.e0_prime = rich(a.e0p, b.e0p, c.e0p).first;
    d.s_sc = rich(a.s, b.s, c.s).first;
    d.ds_sc = rich(a.ds, b.ds, c.ds).first;
    d.e_sc = rich(a.e, b.e, c.e).first;
    d.de_sc = rich(a.de, b.de, c.de).first;
    if (d.err_est > opt.tol)
      throw Error(ErrorKind::GridTooCoarse, "Richardson estimate for e(k) exceeds tolerance");
  }
  d.has_prime = opt.derivative;
  return d;
}

VecC regular_solution(const Potential& P, cplx k, const VecR& x, const JostOptions& opt) {
  JostData d = jost_data(P, k, x, opt);
  VecC out(x.size());
  for (int i = 0; i < x.size(); ++i) out(i) = d.s(i);
  return out;
}

VecC jost_solution(const Potential& P, cplx k, const VecR& x, const JostOptions& opt) {
  JostData d = jost_data(P, k, x, opt);
  VecC out(x.size());
  for (int i = 0; i < x.size(); ++i) out(i) = d.e(i);
  return out;
}

cplx jost_function(const Potential& P, cplx k, const JostOptions& opt) {
  return jost_data(P, k, VecR(), opt).e0;
}

cplx jost_derivative(const Potential& P, cplx k, const JostOptions& opt) {
  JostOptions o = opt;
  o.derivative = true;
  return jost_data(P, k, VecR(), o).e0_prime;
}

cplx jost_derivative_fd(const Potential& P, cplx k, const JostOptions& opt) {
  double h = 1e-5 * std::max(1.0, std::abs(k));
  return (jost_function(P, k + h, opt) - jost_function(P, k - h, opt)) / (2.0 * h);
}

NeumannResult jost_solution_neumann(const Potential& P, cplx k, const Grid& g,
                                    int max_iter, double tol) {
  const int n = g.size();
  MatR CL = g.lower_weights();
  MatC M(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double cu = g.w(j) - CL(i, j);
      if (cu == 0.0) {
        M(i, j) = 0.0;
        continue;
      }
      // sin k(t - x) e^{ik(t - x)} / k written without cancellation.
      cplx tau = kI * k * (g.x(j) - g.x(i));
      cplx ker = std::abs(tau) < 1e-8 ? (g.x(j) - g.x(i)) * (1.0 + tau)
                                      : cexpm1(2.0 * tau) / (2.0 * kI * k);
      M(i, j) = cu * ker * P(g.x(j));
    }
  }
  NeumannResult r;
  r.e_sc = VecC::Ones(n);
  for (int it = 1; it <= max_iter; ++it) {
    VecC next = VecC::Ones(n) + M * r.e_sc;
    r.last_change = (next - r.e_sc).cwiseAbs().maxCoeff();
    r.e_sc = next;
    r.iterations = it;
    if (r.last_change <= tol * std::max(1.0, r.e_sc.cwiseAbs().maxCoeff())) break;
  }
  if (r.last_change > 1e3 * tol * std::max(1.0, r.e_sc.cwiseAbs().maxCoeff()))
    throw Error(ErrorKind::QuadratureNotConverged, "Neumann iteration did not settle");
  r.majorant = P.weighted_abs_integral(0.0, std::numeric_limits<double>::infinity(),
                                       [k](double t) { return std::min(t, 1.0 / std::abs(k)); });
  return r;
}

VecR moment_from_zero(const Potential& P, const VecR& x) {
  VecR out(x.size());
  double acc = 0.0, prev = 0.0;
  for (int i = 0; i < x.size(); ++i) {
    acc += P.weighted_abs_integral(prev, x(i), [](double t) { return t; });
    prev = x(i);
    out(i) = acc;
  }
  return out;
}

VecR min_moment_to_inf(const Potential& P, const VecR& x, double kabs) {
  auto w = [kabs](double t) { return std::min(t, 1.0 / kabs); };
  VecR out(x.size());
  if (x.size() == 0) return out;
  double acc = P.weighted_abs_integral(x(x.size() - 1), std::numeric_limits<double>::infinity(), w);
  out(x.size() - 1) = acc;
  for (int i = static_cast<int>(x.size()) - 2; i >= 0; --i) {
    acc += P.weighted_abs_integral(x(i), x(i + 1), w);
    out(i) = acc;
  }
  return out;
}

BoundCheck solution_bound_check(const Potential& P, const JostData& d) {
  BoundCheck r;
  const double kabs = std::abs(d.k);
  VecR m0 = moment_from_zero(P, d.x);
  VecR mi = min_moment_to_inf(P, d.x, kabs);
  for (int i = 0; i < d.x.size(); ++i) {
    double x = d.x(i);
    double bs = std::min(x, 1.0 / kabs) * std::exp(m0(i));
    double vs = std::abs(d.s_sc(i));
    if (bs > 0.0) r.max_ratio_s = std::max(r.max_ratio_s, vs / bs);
    else if (vs > 1e-14) r.max_ratio_s = std::numeric_limits<double>::infinity();
    double be = std::expm1(mi(i));
    double ve = std::abs(d.e_sc(i) - 1.0);
    r.max_excess_e = std::max(r.max_excess_e, ve - be);
    ++r.checked;
  }
  r.holds = r.max_ratio_s <= 1.0 + 1e-10 && r.max_excess_e <= 1e-12;
  return r;
}

OdeResidual ode_residual(const Potential& P, cplx k, double h, double x_end) {
  int m = std::max(4, static_cast<int>(std::round(x_end / h)));
  VecR x(m + 1);
  for (int i = 0; i <= m; ++i) x(i) = i * x_end / m;
  h = x_end / m;
  JostData d = jost_data(P, k, x);
  std::vector<double> br = P.breakpoints();
  auto straddles = [&](double a, double b) {
    for (double t : br)
      if (t > a - 1e-12 && t < b + 1e-12) return true;
    return false;
  };
  auto worst = [&](auto value) {
    double r = 0.0, ymax = 0.0;
    for (int i = 0; i <= m; ++i) ymax = std::max(ymax, std::abs(value(i)));
    for (int i = 1; i < m; ++i) {
      if (straddles(x(i - 1), x(i + 1))) continue;
      cplx y2 = (value(i + 1) - 2.0 * value(i) + value(i - 1)) / (h * h);
      cplx res = -y2 + (P(x(i)) - k * k) * value(i);
      r = std::max(r, std::abs(res));
    }
    return ymax > 0.0 ? r / (ymax * h * h) : 0.0;
  };
  OdeResidual out;
  out.c_s = worst([&](int i) { return d.s(i); });
  out.c_e = worst([&](int i) { return d.e(i); });
  return out;
}

}  // namespace hl
