#pragma once

#include <vector>

#include "halfline/common.hpp"
#include "halfline/grid.hpp"
#include "halfline/potential.hpp"
#include "halfline/riesz.hpp"
#include "halfline/waveops.hpp"

namespace hl {

// Uniform nodes x_n = n h, n = 1..M, h = X / (M + 1); the node x_0 = 0
// carries the Dirichlet condition, so `nodes` counts it and M = nodes - 1.
struct UniformGrid {
  double X = 0.0;
  int M = 0;
  double h = 0.0;
  VecR x;
  VecR w;  // all equal to h
  VecR k;  // sine wavenumbers n pi / X

  UniformGrid() = default;
  UniformGrid(double x_max, int nodes);
  double norm(const VecC& u) const;
};

// Unnormalized RODFT00 of real and imaginary parts; idst(dst(u)) = u.
VecC dst(const VecC& u);
VecC idst(const VecC& c);

// Fraction of the sine-coefficient mass at wavenumbers above frac k_Nyquist.
double high_band_fraction(const UniformGrid& ug, const VecC& u, double frac = 0.8);

// exp(itT) with the multiplier exp(i t k_n^2).
VecC free_evolve(const UniformGrid& ug, const VecC& phi, double t, double alias_tol = 1e-8);

// Mean of V over [x_n - h/2, x_n + h/2], split at the breakpoints of V.
VecC cell_average(const Potential& P, const UniformGrid& ug);

struct SplitStepOptions {
  double dt_max = 0.0025;  // dt k_Nyquist^2 near 10 on the default 200 / 4096 grid
  bool check_step = false;  // rerun with halved steps
  double step_tol = 1e-6;   // relative change allowed under halving
  double alias_tol = 1e-8;
};

// exp(itL_h) on the uniform grid by Strang splitting
//   exp(i V dt / 2) exp(i T dt) exp(i V dt / 2).
class Propagator {
 public:
  Propagator(const Potential& P, UniformGrid ug, SplitStepOptions opt = {});

  VecC free(const VecC& phi, double t) const;
  VecC evolve(const VecC& phi, double t) const;
  VecC evolve_steps(const VecC& phi, double t, int steps) const;

  const UniformGrid& grid() const { return ug_; }
  const VecC& v() const { return v_; }
  const Potential& potential() const { return P_; }
  const SplitStepOptions& options() const { return opt_; }

 private:
  Potential P_;
  UniformGrid ug_;
  SplitStepOptions opt_;
  VecC v_;
};

// Dense S diag(k^2) S^{-1} + diag(V) on the interior nodes.
MatC uniform_hamiltonian(const Potential& P, const UniformGrid& ug);

// (I - i t L_h / n)^{-n} phi.
VecC resolvent_power_evolve(const Potential& P, const UniformGrid& ug, const VecC& phi,
                            double t, int n);

// Throws DomainEscape when the mass of u within 0.1 X of the right edge
// exceeds tol |u|^2; the message carries suggest_x_max for the run.
void check_domain(const UniformGrid& ug, const VecC& u, double tol, double x_hint);

// (x_q + 2 k_q t_max) / 0.9 with x_q, k_q the 1 - 1e-6 mass quantiles of
// phi in space and in the sine spectrum.
double suggest_x_max(const UniformGrid& ug, const VecC& phi, double t_max);

struct NonstationaryOptions {
  std::vector<double> t_ladder{2.0, 4.0, 8.0, 16.0};
  double escape_tol = 1e-4;
};

struct NonstationaryResult {
  std::vector<double> t;
  std::vector<double> w_defect;  // |w_t - W phi| / |phi|
  std::vector<double> z_defect;  // |z_t - Z phi| / |phi|
  bool w_monotone = true;
  bool z_monotone = true;
  double phi_norm = 0.0;
};

// w_t = exp(itL)(I - P)exp(-itT) phi and z_t = exp(itT)exp(-itL)(I - P) phi
// against stationary W phi and Z phi given on the same uniform nodes.
NonstationaryResult nonstationary_check(const Propagator& prop, const RankOneSum& proj,
                                        const VecC& phi, const VecC& w_phi, const VecC& z_phi,
                                        const NonstationaryOptions& opt = {});

struct SemigroupResult {
  double composition = 0.0;   // |U_V(t+s) - U_V(t)U_V(s)|
  double similarity = 0.0;        // |U_V(t) - W U0(t) Z|
  double intertwining = 0.0;  // |U_V(t)W - W U0(t)|
};

// U_V(t) = exp(itL)(I - P). Defects are the largest relative column errors
// over the test block; ops must live on the propagator's nodes.
SemigroupResult semigroup_check(const Propagator& prop, const SpectralWaveOps& ops,
                                const MatC& tests, double t, double s);

struct LaplaceResult {
  std::vector<double> T;
  std::vector<double> defect;  // relative to |target|
};

// Simpson quadrature of integral_0^T exp(i lambda t) U_V(t) phi dt on a
// dt lattice, compared with target = i R_V(-lambda)(I - P) phi.
LaplaceResult laplace_check(const Propagator& prop, const RankOneSum& proj, const VecC& phi,
                            const VecC& target, cplx lambda, const std::vector<double>& T,
                            double dt = 0.01);

// i R_V(z)(I - P) phi on the panel grid g, resampled to x_out.
VecC laplace_target(const Potential& P, const Grid& g, const RankOneSum& proj_g,
                    const VecC& phi_g, cplx z, const VecR& x_out);

struct CookResult {
  std::vector<double> s;
  std::vector<double> tail;  // integral over [s, t_max] of |A U0(-t) phi|^2
  double total = 0.0;        // integral over [0, t_max]
};

CookResult cook_tail(const Potential& P, const UniformGrid& ug, const VecC& phi, double t_max,
                     double dt, const std::vector<double>& s);

// |exp(itL) f - exp(it mu) f| / |f|.
double eigenmode_defect(const Propagator& prop, const VecC& f, cplx mu, double t);

}  // namespace hl
