#pragma once

#include <vector>

#include "halfline/common.hpp"
#include "halfline/potential.hpp"

namespace hl {

// Rectangle in the k-plane.
struct Rect {
  double re_lo, re_hi, im_lo, im_hi;
};

struct SpectrumOptions {
  double delta = 1e-2;            // contour margin above the real axis
  double contour_min_abs = 1e-6;  // ZeroOnContour below this boundary |e|
  double quad_tol = 1e-9;
  double k_min = 1e-3;
  double scan_step = 5e-3;
  double scan_threshold = 1e-3;   // suspected singularity when |e| is below
  double min_box = 1e-4;          // quadrisection stops at this width
};

struct CountResult {
  int count = 0;
  double raw = 0.0;        // unrounded winding number
  double min_abs_e = 0.0;  // smallest |e| seen on the boundary samples
};

CountResult count_zeros(const Potential& P, const Rect& region,
                        const SpectrumOptions& opt = {});

struct EigenK {
  cplx k;
  int multiplicity = 1;
  double residual = 0.0;  // |e(k0)|
};

struct Singularity {
  double k = 0.0;          // real-axis minimiser of |e|
  double abs_e = 0.0;
  bool confirmed = false;  // |e| reached the residual tolerance on the axis
};

enum class Verdict { SimilarToFree, HasDiscreteSpectrum, HasSpectralSingularities, Undetermined };
const char* to_string(Verdict v);

struct SpectralReport {
  std::vector<EigenK> eigen_k;
  std::vector<cplx> eigenvalues;
  std::vector<Singularity> singularity_scan;
  std::vector<cplx> near_axis;  // zeros with Im k below delta: undetermined
  double kato_moment = 0.0;
  double certified_radius = 0.0;  // all zeros have |k| below this
  bool region_certified = false;
  bool barrier_ok = false;        // sampled |e - 1| < 1/2 on |k| = radius
  Rect region{0, 0, 0, 0};
  int count = 0;
  bool multiplicity_above_one = false;
  Verdict verdict = Verdict::Undetermined;
};

// Smallest r with integral of min(x, 1/r)|V| <= ln 1.5, so |e(k) - 1| <= 1/2
// for |k| >= r; 0 when the first moment is already below ln 1.5.
double certified_radius(const Potential& P);

// Quadrisection by zero counts and Newton refinement to
// |e| <= 1e-10 (1 + |e'|).
SpectralReport locate_eigenvalues(const Potential& P, const Rect& region,
                                  const SpectrumOptions& opt = {});

// Local minima of |e| on [-k_max, -k_min] and [k_min, k_max] below threshold.
std::vector<Singularity> scan_singularities(const Potential& P, double k_max,
                                            double threshold,
                                            const SpectrumOptions& opt = {});

Verdict similarity_verdict(const SpectralReport& r);

// Full pipeline: certified region, eigenvalues, near-axis strip, scan, verdict.
SpectralReport spectral_report(const Potential& P, const SpectrumOptions& opt = {});

// Complex step v0 e^{i theta} on [0, a]: find theta and real k with e(k) = 0.
struct TunedSingularity {
  double v0 = 0.0;
  double theta = 0.0;
  double k = 0.0;
  double abs_e = 0.0;
  bool converged = false;
};
TunedSingularity tune_singularity(double v0, double a, double k_range = 6.0);

// Smallest depth v in [lo, hi] for which -v on [0, a] has a zero in
// [-2, 2] x [delta, 3], by bisection on the zero count.
double eigen_onset_depth(double a, double lo, double hi, double tol = 1e-4,
                         const SpectrumOptions& opt = {});

}  // namespace hl
