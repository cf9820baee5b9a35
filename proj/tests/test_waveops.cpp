#include <doctest.h>

#include "halfline/evolution.hpp"
#include "halfline/opcalc.hpp"
#include "halfline/testspace.hpp"
#include "halfline/waveops.hpp"
#include "oracles.hpp"

using namespace hl;

namespace {

const cplx kBound(0.0, 0.247630706684);

struct Setup {
  Potential P;
  Grid g;
  RankOneSum proj;
};

Setup setup(double v0, double X = 60.0, int order = 8) {
  Setup s{Potential::step(v0, 1.0), Grid::panels(X, 0.5, order, {1.0}), {}};
  std::vector<cplx> ks;
  if (v0 < -2.5) ks.push_back(kBound);
  s.proj = rank_one_on(s.P, ks, s.g.x(), s.g.w(), s.g.x_max());
  return s;
}

}  // namespace

TEST_SUITE("waveops") {

TEST_CASE("kappa and lambda lattices integrate polynomials") {
  KappaRule kr = kappa_rule(20.0, 0.1, 10);
  CHECK(kr.weight.sum() == doctest::Approx(20.0).epsilon(1e-13));
  CHECK((kr.weight.array() * kr.kappa.array().square()).sum() ==
        doctest::Approx(8000.0 / 3.0).epsilon(1e-13));
  for (double eps : {0.0, 0.01}) {
    LambdaLattice L = lambda_lattice(400.0, 0.1, 10, eps);
    double one = 0.0, sq = 0.0;
    for (size_t i = 0; i < L.lambda.size(); ++i) {
      one += L.weight[i];
      sq += L.weight[i] * L.lambda[i] * L.lambda[i];
    }
    CHECK(one == doctest::Approx(800.0).epsilon(1e-12));
    CHECK(sq == doctest::Approx(2.0 * 400.0 * 400.0 * 400.0 / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("free potential: W = Z = I") {
  Grid g = Grid::panels(30.0, 0.5, 8);
  MatC Q = packet_basis(g.x(), g.w(), PacketSpec{2.0, 10.0, 0.0, 4.0, 1.5});
  SpectralWaveOps ops(Potential(), {}, g.x(), g.w());
  CHECK((ops.W(Q) - Q).norm() == 0.0);
  CHECK((ops.Z(Q) - Q).norm() == 0.0);
  WaveDiagnostics d = verify_completeness(ops, Q);
  CHECK(d.zw_defect == 0.0);
  CHECK(d.wz_defect == 0.0);
  CHECK(forms_W(Potential(), g, {}, Q) == Q);
  CHECK(forms_Z(Potential(), g, {}, Q) == Q);
}

TEST_CASE("boundary traces: arguments and the free closed form") {
  // Order 10 keeps the panel interpolation error of e^{-t} below 1e-12.
  Setup s = setup(-3.0, 20.0, 10);
  VecC phi = (-s.g.x().array()).exp().cast<cplx>().matrix();
  CHECK_THROWS_AS(boundary_trace(s.P, s.g, s.proj, phi, TraceKind::AR0, cplx(0.0, 0.0)), Error);
  CHECK_THROWS_AS(boundary_trace(s.P, s.g, s.proj, phi, TraceKind::AR0, cplx(1.0, -0.1)), Error);
  FactorPair F = factorize(s.P);
  for (double lam : {0.5, 4.0}) {
    MatC tr = boundary_trace(s.P, s.g, s.proj, phi, TraceKind::AR0, lam);
    double err = 0.0;
    for (int i = 0; i < s.g.size(); ++i)
      err = std::max(err, std::abs(tr(i, 0) - F.a(s.g.x(i)) * oracle::free_resolvent_exp_to(std::sqrt(lam), s.g.x(i), s.g.x_max())));
    CHECK(err <= 1e-11);
    // Approach from above is O(eps).
    double d1 = s.g.norm(boundary_trace(s.P, s.g, s.proj, phi, TraceKind::AR0, cplx(lam, 1e-2)).col(0) - tr.col(0));
    double d2 = s.g.norm(boundary_trace(s.P, s.g, s.proj, phi, TraceKind::AR0, cplx(lam, 1e-3)).col(0) - tr.col(0));
    CHECK(d2 < 0.2 * d1);
  }
}

TEST_CASE("Hardy ladders and Parseval against the Cook integral") {
  // An incoming packet meets the potential early, so the ladder settles.
  Setup s = setup(-3.0);
  VecC phi = wave_packet(s.g.x(), 6.0, -3.0, 1.5);
  for (TraceKind kind : {TraceKind::AR0, TraceKind::ARV}) {
    HardyLadder h = hardy_ladder(s.P, s.g, s.proj, phi, kind, {0.2, 0.1, 0.05, 0.025});
    CHECK(h.stable);
    CHECK(h.ms_decreasing);
    for (double v : h.l2) CHECK(std::isfinite(v));
  }
  double te = trace_energy(s.P, s.g, phi);
  UniformGrid ug(200.0, 4096);
  CookResult c = cook_tail(s.P, ug, wave_packet(ug.x, 6.0, -3.0, 1.5), 30.0, 0.0025, {0.0, 2.0, 4.0, 8.0});
  CHECK(std::abs(te - c.total) <= 1e-2 * c.total);
  for (size_t i = 1; i < c.tail.size(); ++i) CHECK(c.tail[i] < c.tail[i - 1]);
  CHECK(c.tail.back() <= 1e-6 * c.total);
}

TEST_CASE("bilinear forms agree with the spectral realisation") {
  Setup s = setup(-3.0);
  MatC Q = packet_basis(s.g.x(), s.g.w(), PacketSpec{2.0, 12.0, 0.0, 4.0, 1.5}).leftCols(4);
  SpectralWaveOps ops(s.P, s.proj, s.g.x(), s.g.w());
  CHECK(block_norm(s.g.w(), forms_W(s.P, s.g, s.proj, Q) - ops.W(Q)) <= 2e-3);
  CHECK(block_norm(s.g.w(), forms_Z(s.P, s.g, s.proj, Q) - ops.Z(Q)) <= 2e-3);
}

TEST_CASE("one eigenvalue: kernel of Z and range of W") {
  Setup s = setup(-3.0);
  MatC Q = packet_basis(s.g.x(), s.g.w(), PacketSpec{2.0, 12.0, 0.0, 4.0, 1.5});
  SpectralWaveOps ops(s.P, s.proj, s.g.x(), s.g.w());
  WaveDiagnostics d = verify_completeness(ops, Q);
  CHECK(d.kernel_defect <= 1e-4);
  CHECK(d.range_defect <= 1e-4);
  // P* W phi = 0 for arbitrary phi.
  MatC WQ = ops.W(Q);
  CHECK(block_norm(s.g.w(), s.proj.apply_adjoint(WQ)) <= 1e-10);
}

TEST_CASE("W - I scales with the potential below the small-potential threshold") {
  std::vector<double> ratio;
  for (double c : {0.1, 0.2, 0.4}) {
    Potential P = Potential::step(-1.9 * c, 1.0);
    Grid g = Grid::panels(60.0, 0.5, 8, {1.0});
    MatC Q = packet_basis(g.x(), g.w(), PacketSpec{2.0, 12.0, 0.0, 4.0, 1.5});
    SpectralWaveOps ops(P, {}, g.x(), g.w());
    FactorPair F = factorize(P);
    ratio.push_back(verify_completeness(ops, Q).w_minus_identity / (F.a_weighted * F.b_weighted));
  }
  for (double r : ratio) CHECK(std::isfinite(r));
  CHECK(ratio[1] == doctest::Approx(ratio[0]).epsilon(0.25));
  CHECK(ratio[2] == doctest::Approx(ratio[1]).epsilon(0.25));
}

TEST_CASE("resolvent norm from the Krylov space") {
  Setup s = setup(-3.0, 12.0);
  for (cplx lam : {cplx(0.0, 2.0), cplx(3.0, 0.5)}) {
    double dense = s.g.op_norm(resolvent_kernel(s.P, lam, Side::Full, s.g).matrix);
    CHECK(resolvent_norm(s.P, lam, s.g) == doctest::Approx(dense).epsilon(1e-6));
  }
}

}
