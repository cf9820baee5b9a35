#pragma once

#include <string>
#include <vector>

#include "halfline/common.hpp"
#include "halfline/grid.hpp"
#include "halfline/potential.hpp"

namespace hl {

struct Eigenpair {
  cplx k0;
  cplx mu;          // k0^2
  VecC f;           // e(x, k0) on the grid
  VecC g;           // conj(f), eigenfunction of the adjoint at conj(mu)
  cplx c;           // (f, g) = integral of f^2, tail included
  double residual = 0.0;          // |-f'' + V f - mu f| / |f|
  double adjoint_residual = 0.0;
};

Eigenpair eigenpair(const Potential& P, cplx k0, const Grid& g);

// Sum of rank-one terms f (., conj f) / c on an arbitrary node set with
// weights w. Used on panel grids and on the uniform evolution grid.
struct RankOneSum {
  std::vector<VecC> f;
  std::vector<cplx> c;
  VecR w;

  bool empty() const { return f.empty(); }
  MatC apply(const MatC& u) const;             // P u
  MatC apply_complement(const MatC& u) const;  // (I - P) u
  MatC apply_adjoint(const MatC& u) const;     // P* u in the weighted metric
  MatC dense() const;
};

// f and c evaluated on nodes x (increasing) with weights w covering [0, x_max].
RankOneSum rank_one_on(const Potential& P, const std::vector<cplx>& k0, const VecR& x,
                       const VecR& w, double x_max);

struct Projection {
  MatC matrix;
  int rank = 0;
  std::string source;
};

Projection projection_rank1(const std::vector<Eigenpair>& pairs, const Grid& g);

enum class ContourShape { Circle, Rectangle };

struct ContourSpec {
  ContourShape shape = ContourShape::Circle;
  cplx center{0.0, 0.0};
  double radius = 0.0;   // circle radius, or half width of the rectangle
  double half_height = 0.0;
  int n_quad = 64;       // circle nodes, or Gauss nodes per rectangle side
  double tol = 1e-8;     // allowed change under doubling of n_quad
  double min_abs_e = 1e-8;
};

// Circle of radius 0.75 min(|mu|, Im-distance to [0, inf)) around mu.
ContourSpec default_contour(cplx mu, ContourShape shape = ContourShape::Circle);

Projection projection_contour(const Potential& P, const ContourSpec& spec, const Grid& g);

// Weighted-metric diagnostics.
double idempotence_defect(const Projection& p, const Grid& g);
cplx projection_trace(const Projection& p);

// |(L_h P - P L_h) Q| / (|P| max(1, |L_h Q|)) on a W-orthonormal block Q,
// with L_h the per-panel spectral -d^2/dx^2 + V.
double commutation_defect(const Potential& P, const Projection& p, const Grid& g,
                          const MatC& Q);

struct CommutatorOptions {
  std::vector<double> eps_ladder{0.2, 0.1, 0.05, 0.025, 0.0125};
  double Lambda = 500.0;
  double dk = 0.1;      // kappa panel width on the positive axis
  int q = 10;           // Gauss nodes per lambda panel
  bool tail_correction = false;
};

struct CommutatorResult {
  std::vector<double> eps;
  std::vector<double> D;       // relative to |P|
  std::vector<int> nodes;      // lambda nodes used per eps
  double p_norm = 0.0;
  double d_min = 0.0;
  bool decreasing = true;
  double symmetry_gap = 0.0;   // |[P, V] - [P, B*A]|
};

// D(eps) = |(1/2 pi i) int_{-Lambda}^{Lambda} R0(l - i eps)[P, V]R0(l + i eps) dl - P|
// for a rank-one sum P given by pairs, on the grid g.
CommutatorResult commutator_identity_check(const Potential& P,
                                           const std::vector<Eigenpair>& pairs,
                                           const Grid& g,
                                           const CommutatorOptions& opt = {});

}  // namespace hl
