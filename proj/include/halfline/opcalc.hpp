#pragma once

#include <string>
#include <vector>

#include "halfline/common.hpp"
#include "halfline/grid.hpp"
#include "halfline/potential.hpp"

namespace hl {

enum class Side { Free, Full };

// Dense matrix acting on grid samples, with the grid's weighted metric.
struct DiscretizedOperator {
  MatC matrix;
  std::string label;
  cplx lambda{0.0, 0.0};
};

// Kernel data of R(k^2): the kernel is
//   (1/e0) s(min) e(max)
// written through the bounded scaled arrays s_sc = s e^{ikx}, e_sc = e e^{-ikx}.
// Real k > 0 gives the boundary value at lambda + i0, real k < 0 at lambda - i0.
struct KernelData {
  cplx k;
  cplx e0{1.0, 0.0};
  VecC s_sc;
  VecC e_sc;
};

KernelData kernel_data(const Potential& P, cplx k, Side side, const Grid& g);

// Product-integration matrix R with (R u)_i approximating the integral of
// kernel(x_i, t) u(t).
MatC resolvent_matrix(const Grid& g, const KernelData& kd);
// R u and R^T u for blocks of columns in O(N q) work per column.
MatC resolvent_apply(const Grid& g, const KernelData& kd, const MatC& u);
MatC resolvent_apply_transpose(const Grid& g, const KernelData& kd, const MatC& u);

struct KernelOptions {
  double delta_lambda = 1e-3;  // minimal distance of lambda to [0, inf)
  double residual_tol = 1e-10; // |e(k)| below this means lambda is an eigenvalue
};

// R_0(lambda) or R_V(lambda) with k = sqrt(lambda), Im k > 0.
DiscretizedOperator resolvent_kernel(const Potential& P, cplx lambda, Side side,
                                     const Grid& g, const KernelOptions& opt = {});
// Same by wavenumber; real k is allowed (boundary values).
DiscretizedOperator resolvent_kernel_k(const Potential& P, cplx k, Side side,
                                       const Grid& g, const KernelOptions& opt = {});

// a(x_i) R_ij conj(b(x_j)).
DiscretizedOperator sandwich(const FactorPair& F, const DiscretizedOperator& R,
                             const Grid& g);
// a(x_i) R_ij a(x_j), the operator A R A*.
DiscretizedOperator sandwich_aa(const FactorPair& F, const DiscretizedOperator& R,
                                const Grid& g);

// Residual norm of R_V - R_0 + R_0 V R_V relative to |R_0| |R_V|.
double resolvent_identity_residual(const Potential& P, cplx lambda, const Grid& g);

// Max norm of (T - lambda) R_0 phi - phi for a smooth phi, using per-panel
// spectral second derivatives, relative to max |phi|.
double free_resolvent_residual(const Grid& g, cplx lambda, const VecC& phi);

struct DetResult {
  cplx value;
  cplx value_half;        // same panels with half the nodes
  double refine_err = 0.0;  // |value - value_half| / |value|, bounds the error of value_half
  cplx row_ordering;      // det(I + K) with the weights inside K
  double ordering_gap = 0.0;
  int size = 0;           // order of the reduced determinant
};

// det(I + A R_0(k^2) B*) on the grid of spec and on the grid with half as
// many nodes; the refinement step is the cheaper direction.
DetResult fredholm_det(const Potential& P, cplx k, const GridSpec& spec,
                       double tol = 1e-6);
// Single determinant without refinement.
cplx fredholm_det_on(const Potential& P, cplx k, const Grid& g, cplx* row = nullptr);
// Grid matching the potential: breakpoints as panel edges, X_max >= X_V.
GridSpec det_grid_spec(const Potential& P, int nodes);

// trace(W K) for K = a R_0 conj(b) with symmetrized weights.
cplx det_first_order(const Potential& P, cplx k, const Grid& g);

// Supremum of |Q_V(lambda)| over lambda_lattice, skipping points within
// radius of an excluded eigenvalue.
double q_uniform_bound_probe(const Potential& P, const std::vector<cplx>& lambda_lattice,
                             const std::vector<cplx>& exclusion, double radius,
                             const Grid& g);

}  // namespace hl
