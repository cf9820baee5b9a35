#pragma once

#include <functional>

#include "halfline/common.hpp"

namespace hl {

// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  VecR t;
  VecR w;
};

const GaussRule& gauss_legendre(int q);

// Barycentric weights for the nodes t.
VecR barycentric_weights(const VecR& t);

// Row i holds the values of the Lagrange basis of nodes t at point s,
// evaluated in barycentric form.
MatR lagrange_matrix(const VecR& t, const VecR& s);

// C(i, j) = integral from -1 to t_i of the j-th Lagrange basis polynomial.
MatR partial_integration_matrix(const VecR& t);

// D(i, j) = derivative of the j-th Lagrange basis polynomial at t_i.
MatR differentiation_matrix(const VecR& t);

// Gauss-Legendre nodes and weights for a union of panels.
struct PanelRule {
  VecR x;
  VecR w;
};

PanelRule panel_rule(const std::vector<double>& edges, int q);

// Uniform panel edges on [a, b] with panel width close to h.
std::vector<double> uniform_edges(double a, double b, double h);

// Adaptive Gauss-Kronrod integration of a complex function.
cplx integrate_adaptive(const std::function<cplx(double)>& f, double a,
                        double b, double rel_tol, double* err_est = nullptr,
                        unsigned max_depth = 18);

}  // namespace hl
