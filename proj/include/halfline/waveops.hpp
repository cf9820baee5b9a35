#pragma once

#include <vector>

#include "halfline/common.hpp"
#include "halfline/grid.hpp"
#include "halfline/potential.hpp"
#include "halfline/riesz.hpp"

namespace hl {

// Gauss panels in kappa on [0, kappa_max].
struct KappaRule {
  VecR kappa;
  VecR weight;
};
KappaRule kappa_rule(double kappa_max = 20.0, double panel = 0.1, int q = 10);

// Spectral realisation of the wave operators on an arbitrary node set
// (x increasing, quadrature weights w):
//   W = (I - P) U D S^T w,   Z = S D Vt^T w (I - P),
// with S = sin(kappa x), U = kappa s(x, kappa) / e(-kappa),
// Vt = kappa s(x, kappa) / e(kappa) and D = (2 / pi) kappa weights.
// Kernel columns are generated in blocks on the fly.
class SpectralWaveOps {
 public:
  SpectralWaveOps(const Potential& P, const RankOneSum& proj, VecR x, VecR w,
                  KappaRule kr = kappa_rule(), double min_abs_e = 1e-6);

  // project = false drops the I - P factor (diagnostics only).
  MatC W(const MatC& phi, bool project = true) const;
  MatC Z(const MatC& phi) const;
  // Sine-side coefficients: C = D Vt^T w (I - P) phi, so Z phi = S C.
  MatC z_coefficients(const MatC& phi, bool project = true) const;
  // S C on the nodes and W S C = (I - P) U D (S^T w S) C.
  MatC synthesize(const MatC& coef) const;
  MatC W_from_coefficients(const MatC& coef) const;
  // W T Z phi with T acting exactly on the sine side (multiplier kappa^2).
  MatC WTZ(const MatC& phi) const;
  // W U0(t) Z phi with the multiplier exp(i t kappa^2).
  MatC W_U0_Z(const MatC& phi, double t) const;

  const VecR& x() const { return x_; }
  const VecR& w() const { return w_; }
  const KappaRule& rule() const { return kr_; }
  const RankOneSum& projection() const { return proj_; }
  double min_abs_e() const { return min_e_; }

 private:
  void block(int k0, int k1, MatR& S, MatC& U, MatC& Vt) const;

  Potential P_;
  RankOneSum proj_;
  VecR x_, w_;
  KappaRule kr_;
  VecC em_, ep_;  // e(-kappa), e(kappa)
  double min_e_ = 0.0;
};

enum class TraceKind { AR0, ARV, BR0Adj, BRVAdj };

// Traces at the spectral parameter z (Im z >= 0; real z > 0 means the
// limit from above). Columns of phi are traced independently. For ARV the
// input is first projected with I - P; for BRVAdj with I - P*.
MatC boundary_trace(const Potential& P, const Grid& g, const RankOneSum& proj,
                    const MatC& phi, TraceKind kind, cplx z);

// Lambda lattice on (-Lambda, Lambda) through kappa = sqrt|lambda| on both
// sides; graded near 0 when eps > 0.
struct LambdaLattice {
  std::vector<double> lambda;
  std::vector<double> weight;
};
LambdaLattice lambda_lattice(double Lambda, double dk, int q, double eps = 0.0);

struct HardyLadder {
  std::vector<double> eps;
  std::vector<double> l2;       // integral of |trace(lambda + i eps)|^2
  std::vector<double> ms_diff;  // L2(d lambda) distance of consecutive traces
  bool stable = false;          // last two l2 values within 10 percent
  bool ms_decreasing = false;
};
HardyLadder hardy_ladder(const Potential& P, const Grid& g, const RankOneSum& proj,
                         const VecC& phi, TraceKind kind, const std::vector<double>& eps,
                         double Lambda = 400.0, double dk = 0.1);

// (1 / 2 pi) integral of |A R0(lambda + i0) phi|^2 over (-Lambda, Lambda).
double trace_energy(const Potential& P, const Grid& g, const VecC& phi,
                    double Lambda = 400.0, double dk = 0.05);

struct FormsOptions {
  double Lambda = 400.0;
  double dk = 0.1;
  int q = 10;
  bool tail_correction = true;
};

// W and Z applied to a block Q through the bilinear forms:
//   W = (I - P)[I - (1/2 pi i) int R_V(l - i0) V R_0(l + i0) dl]
//   Z = [I + (1/2 pi i) int R_0(l - i0) V R_V(l + i0) dl](I - P)
MatC forms_W(const Potential& P, const Grid& g, const RankOneSum& proj, const MatC& Q,
             const FormsOptions& opt = {});
MatC forms_Z(const Potential& P, const Grid& g, const RankOneSum& proj, const MatC& Q,
             const FormsOptions& opt = {});

struct WaveDiagnostics {
  double zw_defect = 0.0;        // |ZW - I| on the test block
  double wz_defect = 0.0;        // |WZ - (I - P)|
  double kernel_defect = 0.0;    // max |Z f_mu| / |f_mu|, Z without I - P
  double range_defect = 0.0;     // max |(g_mu, W phi)| / (|g_mu| |phi|), W without I - P
  double w_minus_identity = 0.0; // |W - I| on the test block
  double w_norm = 0.0;
  int test_dim = 0;
};

WaveDiagnostics verify_completeness(const SpectralWaveOps& ops, const MatC& Q);

struct IntertwiningDiagnostics {
  std::vector<cplx> lambda;
  std::vector<double> defect;  // |R_V W - W R_0| / (|R_V| |W|) on the block
  double spectral_distance = 0.0;  // Hausdorff distance of the Ritz spectra over their radius
  double spectral_matrix_gap = 0.0;  // |Q*(WTZ - (I-P)L(I-P))Q| / |Q*(I-P)L(I-P)Q|
};

IntertwiningDiagnostics verify_intertwining(const Potential& P, const Grid& g,
                                            const SpectralWaveOps& ops, const MatC& Q,
                                            const std::vector<cplx>& lambdas);

// Spectral norm of R in the weighted metric from a Krylov space of R*R of
// dimension iters, built with the semi-separable apply.
double resolvent_norm(const Potential& P, cplx lambda, const Grid& g, int iters = 40);

}  // namespace hl
