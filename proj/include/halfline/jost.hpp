#pragma once

#include "halfline/common.hpp"
#include "halfline/grid.hpp"
#include "halfline/potential.hpp"

namespace hl {

struct JostOptions {
  double h_sub = 0.01;      // cell width where V is not locally constant
  double tol = 1e-8;        // a-posteriori bound on |e(k)| error
  double tail_tol = 1e-10;  // bound on |e e^{-ikx} - 1| at the start point
  bool derivative = false;  // also propagate de/dk
};

// Values on a set of abscissae. Arrays are stored scaled so that they stay
// bounded for Im k >= 0: s_sc = s e^{ikx}, e_sc = e e^{-ikx}, and likewise
// for the x-derivatives.
struct JostData {
  cplx k;
  VecR x;
  VecC s_sc, ds_sc;
  VecC e_sc, de_sc;
  cplx e0;                   // Jost function e(k)
  cplx e0_prime{0.0, 0.0};   // de(k)/dk when requested
  bool has_prime = false;
  double err_est = 0.0;      // Richardson estimate for e(k)
  double tail_bound = 0.0;   // certified tail error at the start point
  double x_start = 0.0;

  cplx s(int i) const { return s_sc(i) * std::exp(-kI * k * x(i)); }
  cplx e(int i) const { return e_sc(i) * std::exp(kI * k * x(i)); }
};

// Both solutions at the abscissae x (increasing, >= 0).
JostData jost_data(const Potential& P, cplx k, const VecR& x,
                   const JostOptions& opt = {});

// Unscaled s(x, k) with s(0) = 0, s'(0) = 1.
VecC regular_solution(const Potential& P, cplx k, const VecR& x,
                      const JostOptions& opt = {});
// Unscaled e(x, k) ~ e^{ikx}.
VecC jost_solution(const Potential& P, cplx k, const VecR& x,
                   const JostOptions& opt = {});
cplx jost_function(const Potential& P, cplx k, const JostOptions& opt = {});
cplx jost_derivative(const Potential& P, cplx k, const JostOptions& opt = {});
// Central difference with step 1e-5 max(1, |k|).
cplx jost_derivative_fd(const Potential& P, cplx k, const JostOptions& opt = {});

// Iteration of the Lippmann-Schwinger equation for e e^{-ikx} on the nodes of
// g, by product integration on the panels. Returns scaled values.
struct NeumannResult {
  VecC e_sc;
  int iterations = 0;
  double last_change = 0.0;
  double majorant = 0.0;  // integral of min(x, 1/|k|)|V| from 0
};
NeumannResult jost_solution_neumann(const Potential& P, cplx k, const Grid& g,
                                    int max_iter = 400, double tol = 1e-15);

// Pointwise check of the bounds
//   |s e^{ikx}| <= min(x, 1/|k|) exp(int_0^x t|V|)
//   |e e^{-ikx} - 1| <= exp(int_x^inf min(t, 1/|k|)|V|) - 1.
struct BoundCheck {
  double max_ratio_s = 0.0;   // max of |s e^{ikx}| / bound
  double max_excess_e = 0.0;  // max of |e e^{-ikx} - 1| - bound
  bool holds = true;
  int checked = 0;
};
BoundCheck solution_bound_check(const Potential& P, const JostData& d);

// Cumulative integrals at increasing abscissae x.
VecR moment_from_zero(const Potential& P, const VecR& x);          // int_0^x t|V|
VecR min_moment_to_inf(const Potential& P, const VecR& x, double kabs);

// Second-difference residual of -y'' + (V - k^2) y on a uniform mesh of
// spacing h, away from breakpoints, divided by h^2 and max |y|.
struct OdeResidual {
  double c_s = 0.0;
  double c_e = 0.0;
};
OdeResidual ode_residual(const Potential& P, cplx k, double h, double x_end);

}  // namespace hl
