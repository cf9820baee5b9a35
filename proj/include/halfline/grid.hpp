#pragma once

#include <vector>

#include "halfline/common.hpp"

namespace hl {

struct GridSpec {
  double x_max = 20.0;
  int nodes = 2000;               // target node count
  int order = 10;                 // Gauss nodes per panel
  double grading = 1.0;           // panel edges X (p/P)^grading
  std::vector<double> breakpoints;  // forced panel edges
};

// Composite Gauss-Legendre panels on [0, X_max].
class Grid {
 public:
  Grid() = default;
  explicit Grid(const GridSpec& spec);
  // Uniform panels of width close to h, with forced edges.
  static Grid panels(double x_max, double h, int order,
                     const std::vector<double>& breakpoints = {});
  static Grid from_edges(std::vector<double> edges, int order);

  int size() const { return static_cast<int>(x_.size()); }
  int order() const { return q_; }
  int num_panels() const { return static_cast<int>(edges_.size()) - 1; }
  double x_max() const { return edges_.back(); }
  const VecR& x() const { return x_; }
  const VecR& w() const { return w_; }
  double x(int i) const { return x_(i); }
  double w(int i) const { return w_(i); }
  int panel_of(int i) const { return i / q_; }
  const std::vector<double>& edges() const { return edges_; }
  double panel_width(int p) const { return edges_[p + 1] - edges_[p]; }
  // Partial integration weights of the reference panel (see quadrature.hpp).
  const MatR& local_partial() const { return cloc_; }
  const MatR& local_diff() const { return dloc_; }
  // Partial integration of panel p: weight of node j for the integral from
  // the panel start to node i.
  double partial_weight(int i, int j) const;
  // CL(i, j): weight of node j in the integral over [0, x_i].
  MatR lower_weights() const;

  // Weighted L2 norm and inner product (f, g) = sum w f conj(g).
  double norm(const VecC& f) const;
  cplx inner(const VecC& f, const VecC& g) const;
  // Spectral norm of M in the weighted metric.
  double op_norm(const MatC& M) const;
  // Per-panel spectral second derivative.
  VecC second_derivative(const VecC& f) const;
  MatR second_derivative_matrix() const;
  // Evaluate the piecewise polynomial interpolant at arbitrary points.
  VecC interpolate(const VecC& f, const VecR& s) const;

 private:
  void build(std::vector<double> edges, int order);

  std::vector<double> edges_;
  int q_ = 0;
  VecR x_, w_;
  MatR cloc_, dloc_;
};

}  // namespace hl
