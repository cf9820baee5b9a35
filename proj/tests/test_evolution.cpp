#include <doctest.h>

#include "halfline/evolution.hpp"
#include "halfline/spectrum.hpp"
#include "halfline/testspace.hpp"

using namespace hl;

TEST_SUITE("evolution") {

TEST_CASE("sine transform round trip and node convention") {
  UniformGrid ug(10.0, 256);
  CHECK(ug.M == 255);
  CHECK(ug.h == doctest::Approx(10.0 / 256));
  CHECK(ug.x(0) == doctest::Approx(ug.h));
  VecC u = odd_packet(ug.x, 4.0, 2.0, 0.7, 0.3) + kI * odd_packet(ug.x, 6.0, 1.0, 0.5, 0.0);
  CHECK((idst(dst(u)) - u).norm() <= 1e-13 * u.norm());
}

TEST_CASE("free group: exact modes, unitarity, group law") {
  UniformGrid ug(20.0, 512);
  VecC mode(ug.M);
  for (int n = 0; n < ug.M; ++n) mode(n) = std::sin(ug.k(4) * ug.x(n));
  VecC out = free_evolve(ug, mode, 1.7);
  CHECK((out - std::exp(kI * 1.7 * ug.k(4) * ug.k(4)) * mode).norm() <= 1e-12 * mode.norm());
  VecC phi = odd_packet(ug.x, 8.0, 2.0, 1.0, 0.0);
  CHECK((free_evolve(ug, phi, 0.0) - phi).norm() <= 1e-14 * phi.norm());
  for (double t : {0.5, 3.0, -2.0}) CHECK(ug.norm(free_evolve(ug, phi, t)) == doctest::Approx(ug.norm(phi)).epsilon(1e-10));
  VecC ts = free_evolve(ug, free_evolve(ug, phi, 0.7), 1.1);
  CHECK(ug.norm(ts - free_evolve(ug, phi, 1.8)) <= 1e-10 * ug.norm(phi));
}

TEST_CASE("split step: free case, unitarity and second order") {
  UniformGrid ug(60.0, 1024);
  VecC phi = odd_packet(ug.x, 8.0, 1.0, 2.0, 0.0);
  Propagator free_prop(Potential(), ug);
  CHECK(ug.norm(free_prop.evolve(phi, 2.0) - free_evolve(ug, phi, 2.0)) <= 1e-12 * ug.norm(phi));

  Potential P = Potential::gaussian(-2.0, 1.0);
  Propagator prop(P, ug);
  CHECK(ug.norm(prop.evolve(phi, 3.0)) == doctest::Approx(ug.norm(phi)).epsilon(1e-12));

  SplitStepOptions fine;
  fine.dt_max = 5e-4;
  VecC ref = Propagator(P, ug, fine).evolve(phi, 2.0);
  std::vector<double> err;
  for (double dt : {0.04, 0.02, 0.01}) {
    SplitStepOptions o;
    o.dt_max = dt;
    o.alias_tol = 1.0;
    err.push_back(ug.norm(Propagator(P, ug, o).evolve(phi, 2.0) - ref));
  }
  CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.1));
  CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("step-halving and aliasing guards") {
  UniformGrid ug(60.0, 1024);
  Potential P = Potential::gaussian(-2.0, 1.0);
  VecC phi = odd_packet(ug.x, 8.0, 1.0, 2.0, 0.0);
  SplitStepOptions o;
  o.check_step = true;
  o.dt_max = 0.05;
  o.alias_tol = 1.0;
  try {
    Propagator(P, ug, o).evolve(phi, 2.0);
    FAIL("expected StepTooLarge");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StepTooLarge);
  }
  o.dt_max = 0.0025;
  CHECK_NOTHROW(Propagator(P, ug, o).evolve(phi, 2.0));

  VecC rough(ug.M);
  for (int n = 0; n < ug.M; ++n) rough(n) = std::sin(ug.k(ug.M - 3) * ug.x(n));
  CHECK(high_band_fraction(ug, rough) > 0.99);
  try {
    free_evolve(ug, rough, 1.0);
    FAIL("expected AliasingDetected");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::AliasingDetected);
  }
}

TEST_CASE("cell averages of a step") {
  UniformGrid ug(25.6, 64);  // h = 0.4, cells [0.2, 0.6], [0.6, 1.0], ...
  VecC v = cell_average(Potential::step(-3.0, 0.7), ug);
  CHECK(v(0).real() == doctest::Approx(-3.0));
  CHECK(v(1).real() == doctest::Approx(-3.0 * 0.1 / 0.4));
  CHECK(std::abs(v(2)) == 0.0);
}

TEST_CASE("resolvent power cross-check") {
  UniformGrid ug(40.0, 512);
  Potential P = Potential::gaussian(cplx(-5.0, 1.5), 1.0);
  VecC phi = odd_packet(ug.x, 8.0, 0.4, 3.0, 0.0);
  VecC a = Propagator(P, ug).evolve(phi, 1.0);
  double e64 = ug.norm(a - resolvent_power_evolve(P, ug, phi, 1.0, 64)) / ug.norm(phi);
  double e256 = ug.norm(a - resolvent_power_evolve(P, ug, phi, 1.0, 256)) / ug.norm(phi);
  CHECK(e256 <= 1e-3);
  CHECK(e64 / e256 == doctest::Approx(4.0).epsilon(0.1));  // first order in 1/n
}

TEST_CASE("eigenmode decays at the rate Im mu") {
  Potential P = Potential::gaussian(cplx(-5.0, 1.5), 1.0);
  SpectralReport r = spectral_report(P);
  REQUIRE(r.eigen_k.size() == 1);
  cplx mu = r.eigenvalues[0];
  CHECK(mu.imag() > 0.0);
  UniformGrid ug(60.0, 2048);
  Propagator prop(P, ug);
  VecC f = rank_one_on(P, {r.eigen_k[0].k}, ug.x, ug.w, ug.X).f[0];
  for (double t : {1.0, 4.0}) {
    CHECK(eigenmode_defect(prop, f, mu, t) <= 1e-3);
    CHECK(ug.norm(prop.evolve(f, t)) / ug.norm(f) == doctest::Approx(std::exp(-t * mu.imag())).epsilon(1e-3));
  }
}

TEST_CASE("free potential: non-stationary orbit is constant") {
  UniformGrid ug(200.0, 4096);
  Propagator prop(Potential(), ug);
  VecC phi = wave_packet(ug.x, 12.0, -2.0, 2.5);
  NonstationaryResult r = nonstationary_check(prop, {}, phi, phi, phi);
  for (double d : r.w_defect) CHECK(d <= 1e-12);
  for (double d : r.z_defect) CHECK(d <= 1e-12);
}

TEST_CASE("domain guard") {
  UniformGrid ug(40.0, 1024);
  Propagator prop(Potential(), ug);
  VecC phi = wave_packet(ug.x, 12.0, -2.0, 2.5);
  VecC far = prop.free(phi, -16.0);
  try {
    check_domain(ug, far, 1e-4, suggest_x_max(ug, phi, 16.0));
    FAIL("expected DomainEscape");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DomainEscape);
    CHECK(std::string(e.what()).find("suggested X_max") != std::string::npos);
  }
  double X = suggest_x_max(ug, phi, 16.0);
  CHECK(X > 40.0);
  UniformGrid big(X, 4096);
  CHECK_NOTHROW(check_domain(big, Propagator(Potential(), big).free(wave_packet(big.x, 12.0, -2.0, 2.5), -16.0), 1e-4, X));
}

}
