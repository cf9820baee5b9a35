// Acceptance run: one line per criterion with the measured quantity and its
// pinned tolerance. `halfline_acceptance` runs all twelve, `halfline_acceptance
// N` runs criterion N only. Exit status is 0 iff every criterion run passed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "generators.hpp"
#include "halfline/evolution.hpp"
#include "halfline/jost.hpp"
#include "halfline/opcalc.hpp"
#include "halfline/riesz.hpp"
#include "halfline/spectrum.hpp"
#include "halfline/testspace.hpp"
#include "halfline/waveops.hpp"
#include "oracles.hpp"

using namespace hl;
using nlohmann::json;

namespace {

// Pinned tolerances.
constexpr double kFreeTol = 1e-10;
constexpr double kJostAbs = 1e-8;
constexpr double kOnsetLo = 2.4, kOnsetHi = 2.5;
constexpr double kDetRel = 1e-6;
constexpr double kDetOrder = 2.0;
constexpr double kRieszAgree = 1e-6;
constexpr double kIdempotence = 1e-7;
constexpr double kCommutation = 1e-6;
constexpr double kCommutatorFinal = 5e-2;  // times |P|
constexpr double kZW = 1e-3;
constexpr double kWZ = 5e-3;
constexpr double kKernel = 1e-4;
constexpr double kIntertwining = 1e-3;
constexpr double kSpectral = 1e-2;
constexpr double kNonstationary = 1e-2;
constexpr double kSemigroup = 1e-2;

// Halving ladder from 0.2; the default five-rung ladder stops at 0.0125.
const std::vector<double> kCommutatorLadder{0.2,       0.1,        0.05,        0.025,
                                            0.0125,    0.00625,    0.003125,    0.0015625,
                                            7.8125e-4, 3.90625e-4};

struct Measure {
  std::string what;
  double value;
  double tol;
  bool pass;
};

struct Outcome {
  std::vector<Measure> m;
  void le(const std::string& what, double value, double tol) {
    m.push_back({what, value, tol, std::isfinite(value) && value <= tol});
  }
  void ge(const std::string& what, double value, double tol) {
    m.push_back({what, value, tol, std::isfinite(value) && value >= tol});
  }
  void holds(const std::string& what, bool ok) { m.push_back({what, ok ? 1.0 : 0.0, 1.0, ok}); }
  bool pass() const {
    for (const Measure& x : m)
      if (!x.pass) return false;
    return !m.empty();
  }
};

RunConfig step_config(double v0) {
  RunConfig c;
  c.set("potential", "family", "step");
  std::ostringstream s;
  s << v0;
  c.set("potential", "v0", s.str());
  c.set("potential", "a", "1");
  return c;
}

double check_value(const json& report, const std::string& name) {
  for (const json& c : report["checks"])
    if (c["name"] == name) return c["value"].get<double>();
  return std::nan("");
}

cplx bound_k() { return cplx(0.0, oracle::well_roots(3.0, 1.0, 0.0).at(0)); }

// 1. Free-case identities.
Outcome criterion1() {
  Outcome o;
  Potential Z;
  double e_err = 0.0, det_err = 0.0;
  gen::Source src(1);
  for (int i = 0; i < 10; ++i) {
    cplx k = src.upper_k();
    e_err = std::max(e_err, std::abs(jost_function(Z, k) - 1.0));
    det_err = std::max(det_err, std::abs(fredholm_det(Z, k, det_grid_spec(Z, 200)).value - 1.0));
  }
  o.le("max |e(k) - 1|", e_err, kFreeTol);
  o.le("max |det - 1|", det_err, kFreeTol);
  SpectralReport rep = spectral_report(Z);
  o.le("zero count (rank P)", rep.count, 0.0);

  Grid g = Grid::panels(120.0, 0.5, 8);
  MatC Q = packet_basis(g.x(), g.w(), PacketSpec{});
  SpectralWaveOps ops(Z, {}, g.x(), g.w());
  WaveDiagnostics d = verify_completeness(ops, Q);
  o.le("|W - I|", d.w_minus_identity, kFreeTol);
  o.le("|ZW - I|", d.zw_defect, kFreeTol);
  o.le("|WZ - I|", d.wz_defect, kFreeTol);
  o.le("|Z - I|", block_norm(g.w(), ops.Z(Q) - Q), kFreeTol);
  IntertwiningDiagnostics it = verify_intertwining(Z, g, ops, Q, {cplx(0, 2), cplx(0, -2)});
  o.le("intertwining at +-2i", std::max(it.defect[0], it.defect[1]), kFreeTol);
  CommutatorOptions co;
  co.eps_ladder = {0.2, 0.1};
  CommutatorResult cr = commutator_identity_check(Z, {}, Grid::panels(20.0, 0.5, 8), co);
  o.le("commutator D", std::max(cr.D[0], cr.D[1]), kFreeTol);
  json ev = cli::cmd_evolve_compare(RunConfig()).report;
  double nd = 0.0;
  for (const json& row : ev["table"])
    nd = std::max({nd, row["w_defect"].get<double>(), row["z_defect"].get<double>()});
  o.le("non-stationary defects", nd, kFreeTol);
  return o;
}

// 2. Jost function of steps against the transfer-matrix oracle; a-priori bounds.
Outcome criterion2() {
  Outcome o;
  gen::Source src(2);
  std::vector<cplx> ks;
  for (int i = 0; i < 10; ++i) ks.push_back(src.upper_k(6.0));
  double err = 0.0;
  bool bounds = true;
  int nodes = 0;
  Grid g = Grid::panels(6.0, 0.25, 10, {1.0});
  for (double v0 : {-1.9, -3.0, -8.0}) {
    Potential P = Potential::step(v0, 1.0);
    for (cplx k : ks) {
      err = std::max(err, std::abs(jost_function(P, k) - oracle::jost_step(v0, 1.0, k)));
      BoundCheck b = solution_bound_check(P, jost_data(P, k, g.x()));
      bounds = bounds && b.holds;
      nodes += b.checked;
    }
  }
  o.le("max |e - oracle| over 3 x 10", err, kJostAbs);
  o.holds("a-priori solution bounds at " + std::to_string(nodes) + " nodes", bounds);
  return o;
}

// 3. Onset of the first bound state; zero counts at random depths.
Outcome criterion3() {
  Outcome o;
  SpectrumOptions so;
  double d = eigen_onset_depth(1.0, 0.0, 5.0, 1e-4, so);
  o.ge("onset depth, lower end of (2.4, 2.5)", d, kOnsetLo);
  o.le("onset depth, upper end of (2.4, 2.5)", d, kOnsetHi);
  // Zeros are counted above Im k = delta; near threshold d = pi^2/4 + 2 beta,
  // so the bracket (onset - 2 delta) pins the bound-state threshold pi^2/4.
  o.le("|onset - 2 delta - pi^2/4|", std::abs(d - 2.0 * so.delta - oracle::pi * oracle::pi / 4.0), 2e-3);
  gen::Source src(3);
  int mismatches = 0;
  for (int i = 0; i < 20; ++i) {
    double depth = src.uniform(0.0, 40.0);
    int expected = static_cast<int>(oracle::well_roots(depth, 1.0, so.delta).size());
    Rect r{-1.0, 1.0, so.delta, std::sqrt(depth) + 1.0};
    if (count_zeros(Potential::step(-depth, 1.0), r, so).count != expected) ++mismatches;
  }
  o.le("count mismatches at 20 depths", mismatches, 0.0);
  return o;
}

// 4. First moment below 1 implies no eigenvalues and an empty scan.
Outcome criterion4() {
  Outcome o;
  std::vector<Potential> battery{
      Potential::step(-1.9, 1.0),
      Potential::step(cplx(0.0, 0.9), 1.0),
      Potential::step(cplx(1.2, -1.2), 1.0),
      Potential::exponential(-0.9, 1.0),
      Potential::exponential(cplx(0.5, 0.5), 1.0),
      Potential::gaussian(-1.5, 1.0),
      Potential::gaussian(cplx(0.0, 2.0), 0.9),
      Potential::step_stack({{0.0, 0.5, -3.0}, {1.0, 1.2, 2.0}}),
  };
  gen::Source src(4);
  for (int i = 0; i < 6; ++i) {
    std::vector<StepPiece> pcs;
    for (const auto& p : src.step_stack(6.0)) pcs.push_back({p.a, p.b, p.v});
    Potential P = Potential::step_stack(pcs);
    battery.push_back(P.scaled(src.uniform(0.5, 0.98) / first_moment(P)));
  }
  int bad = 0, below = 0;
  for (const Potential& P : battery) {
    if (!(first_moment(P) < 1.0)) continue;
    ++below;
    SpectralReport r = spectral_report(P);
    if (!r.eigen_k.empty() || !r.singularity_scan.empty() || kato_verdict(P) != KatoVerdict::GuaranteedSimilar)
      ++bad;
  }
  o.ge("potentials with moment < 1", below, 14.0);
  o.le("with eigenvalues or scan hits", bad, 0.0);
  return o;
}

// 5. Fredholm determinant against e(k).
Outcome criterion5() {
  Outcome o;
  RunConfig ex;
  ex.set("potential", "family", "exponential");
  ex.set("potential", "amplitude", "-2");
  ex.set("potential", "rate", "1");
  for (auto [name, cfg] : {std::pair<std::string, RunConfig>{"step -3", step_config(-3.0)},
                           std::pair<std::string, RunConfig>{"exponential -2 e^-x", ex}}) {
    cfg.set("grid", "nodes", "2000");
    json r = cli::cmd_det_check(cfg).report;
    double rel = 0.0, order = 1e9;
    for (const json& row : r["table"]) {
      rel = std::max(rel, row["rel_diff"].get<double>());
      if (!row["order"].is_null()) order = std::min(order, row["order"].get<double>());
    }
    o.le(name + ": max rel |det - e| at 5 k", rel, kDetRel);
    o.ge(name + ": min observed order", order, kDetOrder);
  }
  return o;
}

// 6. Jost-weighted resolvent bound and the free bound over a 5 x 5 lattice.
Outcome criterion6() {
  Outcome o;
  std::vector<std::pair<std::string, Potential>> pots{
      {"step -3", Potential::step(-3.0, 1.0)},
      {"step 1+2i", Potential::step(cplx(1.0, 2.0), 1.0)},
      {"exponential (-1+i) e^-x", Potential::exponential(cplx(-1.0, 1.0), 1.0)}};
  for (const auto& [name, P] : pots) {
    FactorPair F = factorize(P);
    Grid g = Grid::panels(std::max(4.0, P.support_hint(1e-12)), 0.5, 10, P.breakpoints());
    const double K = std::exp(first_moment(P)) * F.a_weighted * F.b_weighted;
    const double K0 = F.a_weighted * F.a_weighted;
    double r6 = 0.0, rc = 0.0;
    for (double re : {-2.0, -1.0, 0.0, 1.0, 2.0})
      for (double im : {0.25, 0.5, 1.0, 2.0, 3.0}) {
        cplx k(re, im);
        cplx e = jost_function(P, k);
        double q = std::abs(e) * g.op_norm(sandwich(F, resolvent_kernel_k(P, k, Side::Full, g), g).matrix);
        double q0 = g.op_norm(sandwich_aa(F, resolvent_kernel_k(P, k, Side::Free, g), g).matrix);
        r6 = std::max(r6, q / K);
        rc = std::max(rc, q0 / K0);
      }
    o.le(name + ": max |e A R_V B*| / (exp(m) <a><b>)", r6, 1.0);
    o.le(name + ": max |A R_0 A*| / <a>^2", rc, 1.0);
  }
  return o;
}

// 7. Riesz projection, two constructions.
Outcome criterion7() {
  Outcome o;
  for (auto [name, v0] : {std::pair<std::string, cplx>{"step -3", -3.0},
                          std::pair<std::string, cplx>{"step -6+2i", cplx(-6.0, 2.0)}}) {
    Potential P = Potential::step(v0, 1.0);
    SpectralReport rep = spectral_report(P);
    Grid g = Grid::panels(40.0, 0.5, 10, {1.0});
    std::vector<Eigenpair> pairs;
    for (const EigenK& z : rep.eigen_k) pairs.push_back(eigenpair(P, z.k, g));
    Projection p = projection_rank1(pairs, g);
    double agree = 0.0;
    for (const Eigenpair& e : pairs) {
      Projection pc = projection_contour(P, default_contour(e.mu), g);
      Projection pe = projection_rank1({e}, g);
      agree = std::max(agree, g.op_norm(pc.matrix - pe.matrix) / g.op_norm(pe.matrix));
    }
    MatC Q = packet_basis(g.x(), g.w(), PacketSpec{0.5, 10.0, 0.0, 4.0, 1.5});
    o.le(name + ": |P_contour - P_rank1| / |P|", agree, kRieszAgree);
    o.le(name + ": |P^2 - P|", idempotence_defect(p, g), kIdempotence);
    o.le(name + ": |LP - PL|", commutation_defect(P, p, g, Q), kCommutation);
    o.le(name + ": |rank - zero count|", std::abs(p.rank - rep.count), 0.0);
    o.le(name + ": |trace P - zero count|", std::abs(projection_trace(p) - double(rep.count)), 1e-8);
    o.ge(name + ": zero count", rep.count, 1.0);
  }
  return o;
}

// 8. Commutator identity along the halving ladder.
Outcome criterion8() {
  Outcome o;
  Potential P = Potential::step(-3.0, 1.0);
  Grid g = Grid::panels(40.0, 0.5, 10, {1.0});
  Eigenpair e = eigenpair(P, bound_k(), g);
  CommutatorOptions co;
  co.eps_ladder = kCommutatorLadder;
  co.tail_correction = true;
  CommutatorResult r = commutator_identity_check(P, {e}, g, co);
  std::ostringstream ladder;
  ladder.precision(3);
  for (size_t i = 0; i < r.eps.size(); ++i) ladder << (i ? " " : "") << r.D[i];
  o.holds("D strictly decreasing [" + ladder.str() + "]", r.decreasing);
  o.le("D(eps_min = 3.9e-4) / |P|", r.d_min, kCommutatorFinal);
  o.le("commutator symmetry gap", r.symmetry_gap, 1e-12);
  return o;
}

// 9 and 10 share one waveops run per potential.
std::map<double, json> waveops_cache;
const json& waveops(double v0) {
  auto it = waveops_cache.find(v0);
  if (it == waveops_cache.end()) it = waveops_cache.emplace(v0, cli::cmd_waveops(step_config(v0)).report).first;
  return it->second;
}

Outcome criterion9() {
  Outcome o;
  for (double v0 : {-1.9, -3.0}) {
    const json& r = waveops(v0);
    std::string tag = "step " + std::to_string(v0).substr(0, 4) + ": ";
    o.le(tag + "|ZW - I|", check_value(r, "zw_minus_identity"), kZW);
    o.le(tag + "|WZ - (I - P)|", check_value(r, "wz_minus_complement"), kWZ);
    if (v0 < -2.5) o.le(tag + "|Z f_mu| / |f_mu|", check_value(r, "z_kernel"), kKernel);
  }
  return o;
}

Outcome criterion10() {
  Outcome o;
  for (double v0 : {-1.9, -3.0}) {
    const json& r = waveops(v0);
    std::string tag = "step " + std::to_string(v0).substr(0, 4) + ": ";
    o.le(tag + "intertwining at +2i", check_value(r, "intertwining_0"), kIntertwining);
    o.le(tag + "intertwining at -2i", check_value(r, "intertwining_1"), kIntertwining);
    o.le(tag + "Ritz spectra of WTZ vs L_h on H_c", check_value(r, "spectral_distance"), kSpectral);
  }
  return o;
}

// 11. Time-dependent limits.
Outcome criterion11() {
  Outcome o;
  for (double v0 : {-1.9, -3.0}) {
    json r = cli::cmd_evolve_compare(step_config(v0)).report;
    std::string tag = "step " + std::to_string(v0).substr(0, 4) + ": ";
    std::ostringstream w, z;
    w.precision(3);
    z.precision(3);
    for (const json& row : r["table"]) {
      w << " " << row["w_defect"].get<double>();
      z << " " << row["z_defect"].get<double>();
    }
    o.holds(tag + "W defect monotone [" + w.str().substr(1) + "]", check_value(r, "w_not_monotone") == 0.0);
    o.holds(tag + "Z defect monotone [" + z.str().substr(1) + "]", check_value(r, "z_not_monotone") == 0.0);
    o.le(tag + "W defect at t = 16", check_value(r, "w_final"), kNonstationary);
    o.le(tag + "Z defect at t = 16", check_value(r, "z_final"), kNonstationary);
  }
  return o;
}

// 12. Semigroup, U_V = W U0 Z and the Laplace transform.
Outcome criterion12() {
  Outcome o;
  for (double v0 : {-1.9, -3.0}) {
    Potential P = Potential::step(v0, 1.0);
    std::vector<cplx> ks;
    if (v0 < -2.5) ks.push_back(bound_k());
    UniformGrid ug(200.0, 4096);
    SplitStepOptions so;
    so.dt_max = 6.25e-4;  // slow packets dwell at the jump of V
    Propagator prop(P, ug, so);
    RankOneSum proj = rank_one_on(P, ks, ug.x, ug.w, ug.X);
    SpectralWaveOps ops(P, proj, ug.x, ug.w, kappa_rule(6.0, 0.02, 10));
    MatC tests(ug.M, 3);
    tests.col(0) = wave_packet(ug.x, 12.0, -2.0, 2.5);
    tests.col(1) = wave_packet(ug.x, 8.0, 1.0, 2.5);
    tests.col(2) = odd_packet(ug.x, 5.0, 0.5, 2.0, 0.0);
    SemigroupResult s = semigroup_check(prop, ops, tests, 1.0, 1.0);
    std::string tag = "step " + std::to_string(v0).substr(0, 4) + ": ";
    o.le(tag + "|U(2) - U(1)U(1)|", s.composition, kSemigroup);
    o.le(tag + "|U(1) - W U0(1) Z|", s.similarity, kSemigroup);
    o.le(tag + "|U(1)W - W U0(1)|", s.intertwining, kSemigroup);

    Grid g = Grid::panels(200.0, 0.5, 10, P.breakpoints());
    RankOneSum pg = rank_one_on(P, ks, g.x(), g.w(), g.x_max());
    const cplx lam(1.0, 1.0);
    VecC target = laplace_target(P, g, pg, wave_packet(g.x(), 8.0, 1.0, 2.5), -lam, ug.x);
    LaplaceResult lr = laplace_check(prop, proj, tests.col(1), target, lam, {5.0, 10.0, 20.0});
    bool decreasing = lr.defect[1] < lr.defect[0] && lr.defect[2] < lr.defect[1];
    std::ostringstream ls;
    ls.precision(3);
    for (double d : lr.defect) ls << " " << d;
    o.holds(tag + "Laplace defect decreasing in T [" + ls.str().substr(1) + "]", decreasing);
    o.le(tag + "Laplace defect at T = 20", lr.defect.back(), kSemigroup);
  }
  return o;
}

const char* kTitles[] = {"",
                         "free-case identities",
                         "Jost oracle and a-priori bounds",
                         "spectrum threshold and zero counts",
                         "small-moment consistency",
                         "determinant identity",
                         "resolvent bounds on a lattice",
                         "Riesz projection cross-validation",
                         "commutator identity",
                         "wave-operator identities",
                         "intertwining and similarity",
                         "non-stationary convergence",
                         "semigroup and Laplace checks"};

}  // namespace

int main(int argc, char** argv) {
  const std::function<Outcome()> table[] = {nullptr,     criterion1,  criterion2, criterion3, criterion4,
                                            criterion5,  criterion6,  criterion7, criterion8, criterion9,
                                            criterion10, criterion11, criterion12};
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty())
    for (int i = 1; i <= 12; ++i) ids.push_back(i);
  bool all = true;
  for (int id : ids) {
    if (id < 1 || id > 12) {
      std::fprintf(stderr, "criterion %d does not exist\n", id);
      return 2;
    }
    auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    std::string err;
    try {
      out = table[id]();
    } catch (const std::exception& e) {
      err = e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = err.empty() && out.pass();
    all = all && ok;
    std::printf("criterion %2d %-4s %-36s (%.1f s)\n", id, ok ? "PASS" : "FAIL", kTitles[id], secs);
    for (const Measure& m : out.m)
      std::printf("    %s %-58s %.3e (tol %.1e)\n", m.pass ? "ok  " : "FAIL", m.what.c_str(), m.value, m.tol);
    if (!err.empty()) std::printf("    error: %s\n", err.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
