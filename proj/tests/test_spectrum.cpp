#include <doctest.h>

#include "generators.hpp"
#include "halfline/jost.hpp"
#include "halfline/spectrum.hpp"
#include "oracles.hpp"

using namespace hl;

TEST_SUITE("spectrum") {

const Rect kBox{-2.0, 2.0, 1e-2, 3.0};

TEST_CASE("free potential has no zeros and is similar to free") {
  CHECK(count_zeros(Potential(), kBox).count == 0);
  SpectralReport r = spectral_report(Potential());
  CHECK(r.eigen_k.empty());
  CHECK(r.singularity_scan.empty());
  CHECK(r.verdict == Verdict::SimilarToFree);
}

TEST_CASE("attractive steps: counts and the bound state") {
  CHECK(count_zeros(Potential::step(-3.0, 1.0), kBox).count == 1);
  CHECK(count_zeros(Potential::step(-1.9, 1.0), kBox).count == 0);

  SpectralReport r = spectral_report(Potential::step(-3.0, 1.0));
  REQUIRE(r.eigen_k.size() == 1);
  auto beta = oracle::well_roots(3.0, 1.0, 1e-2);
  REQUIRE(beta.size() == 1);
  CHECK(std::abs(r.eigen_k[0].k - cplx(0.0, beta[0])) <= 1e-8);
  CHECK(r.eigen_k[0].multiplicity == 1);
  CHECK(r.verdict == Verdict::HasDiscreteSpectrum);
  CHECK(r.eigenvalues[0].real() == doctest::Approx(-beta[0] * beta[0]).epsilon(1e-8));

  SpectralReport s = spectral_report(Potential::step(-1.9, 1.0));
  CHECK(s.eigen_k.empty());
  CHECK(s.verdict == Verdict::SimilarToFree);
  CHECK(s.kato_moment == doctest::Approx(0.95));
}

TEST_CASE("property: zero counts match the well oracle") {
  gen::Source src(99);
  for (int trial = 0; trial < 8; ++trial) {
    double d = src.uniform(0.5, 40.0), a = src.uniform(0.5, 1.5);
    int expected = static_cast<int>(oracle::well_roots(d, a, 1e-2).size());
    double top = std::sqrt(d) + 1.0;
    CountResult c = count_zeros(Potential::step(-d, a), {-1.0, 1.0, 1e-2, top});
    CHECK_MESSAGE(c.count == expected, "depth " << d << " width " << a);
    CHECK(std::abs(c.raw - c.count) < 0.1);
  }
}

TEST_CASE("eigenvalue invariants on complex potentials") {
  gen::Source src(17);
  for (int trial = 0; trial < 4; ++trial) {
    Potential P = Potential::step(std::polar(src.uniform(4.0, 12.0), src.uniform(2.2, 3.0)), 1.0);
    SpectrumOptions o;
    SpectralReport r = spectral_report(P, o);
    int total = 0;
    for (const EigenK& z : r.eigen_k) {
      total += z.multiplicity;
      CHECK(z.k.imag() > o.delta);
      CHECK(std::abs(jost_function(P, z.k)) <= 1e-9 * (1.0 + std::abs(jost_derivative(P, z.k))));
    }
    CHECK(total == r.count);
  }
}

TEST_CASE("nested rectangles give equal counts") {
  Potential P = Potential::step(cplx(-6.0, 3.0), 1.0);
  CountResult inner = count_zeros(P, {-3.0, 3.0, 0.05, 4.0});
  CountResult outer = count_zeros(P, {-4.0, 4.0, 0.05, 5.0});
  CHECK(inner.count == outer.count);
  CHECK(inner.count >= 1);
}

TEST_CASE("certified radius keeps e away from zero") {
  for (Potential P : {Potential::step(-3.0, 1.0), Potential::exponential(cplx(2.0, -3.0), 1.0)}) {
    double r = certified_radius(P);
    REQUIRE(r > 0.0);
    for (int i = 0; i <= 40; ++i) {
      cplx k = std::polar(r, oracle::pi * i / 40.0);
      CHECK(std::abs(jost_function(P, k) - 1.0) <= 0.5 + 1e-9);
    }
  }
}

TEST_CASE("real steps have no real-axis zeros") {
  for (double v0 : {-3.0, -1.0, 2.0, 6.0}) {
    Potential P = Potential::step(v0, 1.0);
    CHECK(scan_singularities(P, 10.0, 1e-3).empty());
    for (double k = 0.05; k < 10.0; k += 0.37)
      CHECK(std::abs(oracle::jost_step(v0, 1.0, k)) > 1e-2);
  }
}

TEST_CASE("a tuned complex step produces a spectral singularity") {
  TunedSingularity t = tune_singularity(4.0, 1.0);
  REQUIRE(t.converged);
  CHECK(t.abs_e < 1e-6);
  Potential P = Potential::step(std::polar(t.v0, t.theta), 1.0);
  cplx ref = oracle::jost_step(std::polar(t.v0, t.theta), 1.0, t.k);
  CHECK(std::abs(ref) < 1e-6);
  CHECK(similarity_verdict(spectral_report(P)) == Verdict::HasSpectralSingularities);
}

}
