#include "halfline/grid.hpp"

#include <algorithm>
#include <cmath>

#include "halfline/quadrature.hpp"

namespace hl {

namespace {

std::vector<double> insert_breakpoints(std::vector<double> edges,
                                       const std::vector<double>& breaks) {
  for (double b : breaks) {
    if (!(b > edges.front() && b < edges.back())) continue;
    auto it = std::lower_bound(edges.begin(), edges.end(), b);
    size_t j = static_cast<size_t>(it - edges.begin());
    double left = edges[j - 1], right = edges[j];
    double width = right - left;
    if (right - b < 0.3 * width && j + 1 < edges.size()) {
      edges[j] = b;
    } else if (b - left < 0.3 * width && j - 1 > 0) {
      edges[j - 1] = b;
    } else {
      edges.insert(edges.begin() + static_cast<long>(j), b);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace

Grid::Grid(const GridSpec& spec) {
  if (!(spec.x_max > 0.0)) throw Error(ErrorKind::Input, "grid needs X_max > 0");
  if (spec.order < 2) throw Error(ErrorKind::Input, "grid order must be >= 2");
  if (spec.nodes < spec.order) throw Error(ErrorKind::Input, "grid needs more nodes");
  int np = std::max(1, (spec.nodes + spec.order - 1) / spec.order);
  std::vector<double> edges(np + 1);
  for (int p = 0; p <= np; ++p)
    edges[p] = spec.x_max * std::pow(static_cast<double>(p) / np, spec.grading);
  edges.back() = spec.x_max;
  build(insert_breakpoints(edges, spec.breakpoints), spec.order);
}

Grid Grid::panels(double x_max, double h, int order,
                  const std::vector<double>& breakpoints) {
  std::vector<double> cuts{0.0};
  for (double b : breakpoints)
    if (b > 0.0 && b < x_max) cuts.push_back(b);
  cuts.push_back(x_max);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<double> edges{0.0};
  for (size_t s = 0; s + 1 < cuts.size(); ++s) {
    auto e = uniform_edges(cuts[s], cuts[s + 1], h);
    edges.insert(edges.end(), e.begin() + 1, e.end());
  }
  Grid g;
  g.build(edges, order);
  return g;
}

Grid Grid::from_edges(std::vector<double> edges, int order) {
  Grid g;
  g.build(std::move(edges), order);
  return g;
}

void Grid::build(std::vector<double> edges, int order) {
  edges_ = std::move(edges);
  q_ = order;
  PanelRule r = panel_rule(edges_, q_);
  x_ = r.x;
  w_ = r.w;
  const GaussRule& g = gauss_legendre(q_);
  cloc_ = partial_integration_matrix(g.t);
  dloc_ = differentiation_matrix(g.t);
}

double Grid::partial_weight(int i, int j) const {
  int p = panel_of(i);
  if (panel_of(j) != p) return panel_of(j) < p ? w_(j) : 0.0;
  return cloc_(i % q_, j % q_) * 0.5 * panel_width(p);
}

MatR Grid::lower_weights() const {
  const int n = size();
  MatR CL = MatR::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    int p = panel_of(i);
    for (int j = 0; j < p * q_; ++j) CL(i, j) = w_(j);
    double half = 0.5 * panel_width(p);
    for (int jl = 0; jl < q_; ++jl) CL(i, p * q_ + jl) = cloc_(i % q_, jl) * half;
  }
  return CL;
}

double Grid::norm(const VecC& f) const {
  return std::sqrt((w_.array() * f.array().abs2()).sum());
}

cplx Grid::inner(const VecC& f, const VecC& g) const {
  return (w_.array().cast<cplx>() * f.array() * g.array().conjugate()).sum();
}

double Grid::op_norm(const MatC& M) const {
  VecR sw = w_.array().sqrt();
  MatC S = sw.asDiagonal() * M * sw.cwiseInverse().asDiagonal();
  Eigen::BDCSVD<MatC> svd(S);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

VecC Grid::second_derivative(const VecC& f) const {
  VecC out(size());
  MatR D2 = dloc_ * dloc_;
  for (int p = 0; p < num_panels(); ++p) {
    double s = 2.0 / panel_width(p);
    out.segment(p * q_, q_) = (D2 * s * s).cast<cplx>() * f.segment(p * q_, q_);
  }
  return out;
}

MatR Grid::second_derivative_matrix() const {
  MatR out = MatR::Zero(size(), size());
  MatR D2 = dloc_ * dloc_;
  for (int p = 0; p < num_panels(); ++p) {
    double s = 2.0 / panel_width(p);
    out.block(p * q_, p * q_, q_, q_) = D2 * s * s;
  }
  return out;
}

VecC Grid::interpolate(const VecC& f, const VecR& s) const {
  const GaussRule& g = gauss_legendre(q_);
  VecC out = VecC::Zero(s.size());
  for (int i = 0; i < s.size(); ++i) {
    double x = s(i);
    if (x < 0.0 || x > x_max()) continue;
    auto it = std::upper_bound(edges_.begin(), edges_.end(), x);
    int p = std::clamp(static_cast<int>(it - edges_.begin()) - 1, 0, num_panels() - 1);
    double a = edges_[p], b = edges_[p + 1];
    VecR t(1);
    t(0) = 2.0 * (x - a) / (b - a) - 1.0;
    MatR L = lagrange_matrix(g.t, t);
    out(i) = (L.row(0).cast<cplx>() * f.segment(p * q_, q_))(0);
  }
  return out;
}

}  // namespace hl
