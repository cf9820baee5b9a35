#include "halfline/testspace.hpp"

#include <cmath>
#include <vector>

namespace hl {

VecC odd_packet(const VecR& x, double c, double k, double sigma, double phase) {
  VecC out(x.size());
  auto f = [&](double t) {
    double u = t - c;
    return std::cos(k * u + phase) * std::exp(-u * u / (2.0 * sigma * sigma));
  };
  for (int i = 0; i < x.size(); ++i) out(i) = f(x(i)) - f(-x(i));
  return out;
}

VecC wave_packet(const VecR& x, double c, double k, double sigma) {
  return odd_packet(x, c, k, sigma, 0.0) - kI * odd_packet(x, c, k, sigma, 0.5 * kPi);
}

MatC packet_basis(const VecR& x, const VecR& w, const PacketSpec& s, double cutoff) {
  std::vector<VecC> cols;
  for (double c = s.x_lo; c <= s.x_hi + 1e-9; c += s.sigma)
    for (double k = s.k_lo; k <= s.k_hi + 1e-9; k += 0.5 / s.sigma)
      for (double ph : {0.0, 0.5 * kPi}) cols.push_back(odd_packet(x, c, k, s.sigma, ph));
  MatC A(x.size(), static_cast<long>(cols.size()));
  VecR sw = w.array().sqrt();
  for (size_t j = 0; j < cols.size(); ++j) A.col(static_cast<long>(j)) = sw.cast<cplx>().cwiseProduct(cols[j]);
  Eigen::BDCSVD<MatC> svd(A, Eigen::ComputeThinU);
  const VecR& sv = svd.singularValues();
  int keep = 0;
  while (keep < sv.size() && sv(keep) > cutoff * sv(0)) ++keep;
  MatC U = svd.matrixU().leftCols(keep);
  return sw.cwiseInverse().cast<cplx>().asDiagonal() * U;
}

double block_norm(const VecR& w, const MatC& Y) {
  if (Y.size() == 0) return 0.0;
  MatC S = w.array().sqrt().matrix().cast<cplx>().asDiagonal() * Y;
  Eigen::BDCSVD<MatC> svd(S);
  return svd.singularValues()(0);
}

}  // namespace hl
