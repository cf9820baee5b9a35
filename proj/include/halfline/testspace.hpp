#pragma once

#include "halfline/common.hpp"

namespace hl {

// Gaussian packets with centres in [x_lo, x_hi] (step sigma), carrier
// wavenumbers in [k_lo, k_hi] (step 0.5 / sigma) and two phases.
struct PacketSpec {
  double x_lo = 2.0;
  double x_hi = 20.0;
  double k_lo = 0.0;
  double k_hi = 6.0;
  double sigma = 1.5;
};

// cos(k (x - c) + phase) exp(-(x - c)^2 / (2 sigma^2)), made odd about 0 so
// that it satisfies the Dirichlet condition.
VecC odd_packet(const VecR& x, double c, double k, double sigma, double phase);

// exp(ik(x - c)) exp(-(x - c)^2 / (2 sigma^2)), made odd about 0. Negative k
// moves toward the origin under exp(-itT).
VecC wave_packet(const VecR& x, double c, double k, double sigma);

// Columns orthonormal in the metric sum w f conj(g); directions with
// singular value below cutoff times the largest are dropped.
MatC packet_basis(const VecR& x, const VecR& w, const PacketSpec& s, double cutoff = 1e-8);

// Spectral norm of diag(sqrt w) Y: the operator norm of M restricted to the
// span of a W-orthonormal block Q when Y = M Q.
double block_norm(const VecR& w, const MatC& Y);

}  // namespace hl
