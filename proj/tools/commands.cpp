#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "halfline/evolution.hpp"
#include "halfline/jost.hpp"
#include "halfline/opcalc.hpp"
#include "halfline/riesz.hpp"
#include "halfline/spectrum.hpp"
#include "halfline/testspace.hpp"
#include "halfline/waveops.hpp"

namespace hl::cli {

using nlohmann::json;

namespace {

std::vector<cplx> parse_k_list(const std::string& text) {
  std::vector<cplx> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';'))
    if (item.find_first_not_of(" \t") != std::string::npos) out.push_back(parse_complex(item));
  if (out.empty()) throw Error(ErrorKind::Input, "empty wavenumber list");
  return out;
}

SpectrumOptions spectrum_options(const RunConfig& cfg) {
  SpectrumOptions o;
  o.delta = cfg.get_double("spectrum", "delta", o.delta);
  o.k_min = cfg.get_double("spectrum", "k_min", o.k_min);
  o.scan_step = cfg.get_double("spectrum", "scan_step", o.scan_step);
  o.scan_threshold = cfg.get_double("spectrum", "scan_threshold", o.scan_threshold);
  o.contour_min_abs = cfg.get_double("spectrum", "contour_min_abs", o.contour_min_abs);
  return o;
}

json check(const std::string& name, double value, double tol) {
  return {{"name", name}, {"value", value}, {"tol", tol}, {"pass", value <= tol}};
}

int exit_from(const json& checks) {
  for (const json& c : checks)
    if (!c["pass"].get<bool>()) return 1;
  return 0;
}

std::vector<cplx> eigen_ks(const SpectralReport& rep) {
  if (rep.multiplicity_above_one)
    throw Error(ErrorKind::JordanBlockDetected, "a zero of e(k) has multiplicity above one");
  if (rep.verdict == Verdict::HasSpectralSingularities)
    throw Error(ErrorKind::NearSingularity, "e(k) vanishes on the real axis");
  std::vector<cplx> ks;
  for (const EigenK& z : rep.eigen_k) ks.push_back(z.k);
  return ks;
}

}  // namespace

std::string report_hash(const json& report) {
  std::string s = report.dump();
  unsigned long long h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", h);
  return buf;
}

CommandOutput cmd_kato(const RunConfig& cfg) {
  Potential P = potential_from_config(cfg);
  FactorPair F = factorize(P);
  CommandOutput out;
  double m = first_moment(P, cfg.get_double("tolerances", "moment_rel", 1e-10));
  out.report = report_header("kato", cfg);
  out.report["kato_moment"] = m;
  out.report["kato_verdict"] = to_string(kato_verdict(P));
  out.report["a_weighted"] = F.a_weighted;
  out.report["b_weighted"] = F.b_weighted;
  return out;
}

CommandOutput cmd_spectrum(const RunConfig& cfg) {
  Potential P = potential_from_config(cfg);
  SpectrumOptions o = spectrum_options(cfg);
  SpectralReport rep = spectral_report(P, o);
  json j = report_header("spectrum", cfg);
  j["kato_moment"] = rep.kato_moment;
  j["kato_verdict"] = to_string(kato_verdict(P));
  j["certified_radius"] = rep.certified_radius;
  j["region_certified"] = rep.region_certified;
  j["region"] = {rep.region.re_lo, rep.region.re_hi, rep.region.im_lo, rep.region.im_hi};
  j["zero_count"] = rep.count;
  j["eigenvalues"] = json::array();
  for (size_t i = 0; i < rep.eigen_k.size(); ++i)
    j["eigenvalues"].push_back({{"k", to_json(rep.eigen_k[i].k)},
                                {"lambda", to_json(rep.eigenvalues[i])},
                                {"multiplicity", rep.eigen_k[i].multiplicity},
                                {"residual", rep.eigen_k[i].residual}});
  j["singularity_scan"] = json::array();
  for (const Singularity& s : rep.singularity_scan)
    j["singularity_scan"].push_back({{"k", s.k}, {"abs_e", s.abs_e}, {"confirmed", s.confirmed}});
  j["near_axis"] = json::array();
  for (cplx k : rep.near_axis) j["near_axis"].push_back(to_json(k));
  j["verdict"] = to_string(rep.verdict);
  CommandOutput out;
  out.report = j;
  return out;
}

CommandOutput cmd_jost(const RunConfig& cfg) {
  Potential P = potential_from_config(cfg);
  std::vector<cplx> ks = parse_k_list(cfg.get("jost", "k", "1;2;1+1i;2i"));
  const bool dump = cfg.get_bool("jost", "dump", false);
  const double x_max = cfg.get_double("jost", "dump_x_max", 5.0);
  const int samples = cfg.get_int("jost", "dump_samples", 201);
  JostOptions jo;
  jo.tol = cfg.get_double("tolerances", "jost", jo.tol);
  json rows = json::array();
  std::ostringstream csv;
  if (dump) csv << "k_re,k_im,x,s_re,s_im,e_re,e_im\n";
  csv.precision(12);
  for (cplx k : ks) {
    cplx e = jost_function(P, k, jo);
    cplx d = jost_derivative(P, k, jo);
    cplx dfd = jost_derivative_fd(P, k, jo);
    rows.push_back({{"k", to_json(k)},
                    {"e", to_json(e)},
                    {"abs_e", std::abs(e)},
                    {"e_prime", to_json(d)},
                    {"e_prime_fd_gap", std::abs(d - dfd) / std::max(1.0, std::abs(d))}});
    if (dump) {
      VecR x = VecR::LinSpaced(samples, 0.0, x_max);
      JostData jd = jost_data(P, k, x, jo);
      for (int i = 0; i < samples; ++i) {
        cplx s = jd.s(i), ee = jd.e(i);
        csv << k.real() << "," << k.imag() << "," << x(i) << "," << s.real() << "," << s.imag()
            << "," << ee.real() << "," << ee.imag() << "\n";
      }
    }
  }
  CommandOutput out;
  out.report = report_header("jost", cfg);
  out.report["table"] = rows;
  if (dump) out.csv = csv.str();
  return out;
}

CommandOutput cmd_det_check(const RunConfig& cfg) {
  Potential P = potential_from_config(cfg);
  std::vector<cplx> ks = parse_k_list(cfg.get("det", "k", "1i;0.5+1i;2+0.5i;1+2i;3+1i"));
  const int nodes = cfg.get_int("grid", "nodes", 2000);
  const double tol = cfg.get_double("tolerances", "det", 1e-6);
  const double min_order = cfg.get_double("det", "min_order", 2.0);
  json rows = json::array();
  json checks = json::array();
  for (cplx k : ks) {
    cplx e = jost_function(P, k);
    DetResult dr = fredholm_det(P, k, det_grid_spec(P, nodes), tol);
    double rel = std::abs(dr.value - e) / std::max(1e-300, std::abs(e));
    // Observed order from the coarse sequence nodes / 16, / 8, / 4, / 2.
    std::vector<double> err;
    for (int div : {16, 8, 4}) {
      Grid g(det_grid_spec(P, std::max(20, nodes / div)));
      err.push_back(std::abs(fredholm_det_on(P, k, g) - e) / std::abs(e));
    }
    err.push_back(std::abs(dr.value_half - e) / std::abs(e));
    json order = nullptr;
    for (size_t i = err.size() - 1; i-- > 0;)
      if (err[i + 1] > 1e-12) {
        order = std::log2(err[i] / err[i + 1]);
        break;
      }
    rows.push_back({{"k", to_json(k)},
                    {"e", to_json(e)},
                    {"det", to_json(dr.value)},
                    {"rel_diff", rel},
                    {"refine_err", dr.refine_err},
                    {"coarse_errors", err},
                    {"order", order}});
    checks.push_back(check("rel_diff", rel, tol));
    if (!order.is_null()) checks.push_back(check("order_deficit", min_order - order.get<double>(), 0.0));
  }
  CommandOutput out;
  out.report = report_header("det-check", cfg);
  out.report["table"] = rows;
  out.report["checks"] = checks;
  out.exit_code = exit_from(checks);
  return out;
}

CommandOutput cmd_waveops(const RunConfig& cfg) {
  Potential P = potential_from_config(cfg);
  SpectralReport rep = spectral_report(P, spectrum_options(cfg));
  std::vector<cplx> ks = eigen_ks(rep);
  const double X = cfg.get_double("grid", "x_max", 120.0);
  Grid g = Grid::panels(X, cfg.get_double("grid", "panel", 0.5), cfg.get_int("grid", "order", 8),
                        P.breakpoints());
  RankOneSum proj = rank_one_on(P, ks, g.x(), g.w(), g.x_max());
  PacketSpec ps;
  ps.x_lo = cfg.get_double("packets", "x_lo", ps.x_lo);
  ps.x_hi = cfg.get_double("packets", "x_hi", ps.x_hi);
  ps.k_hi = cfg.get_double("packets", "k_hi", ps.k_hi);
  ps.sigma = cfg.get_double("packets", "sigma", ps.sigma);
  MatC Q = packet_basis(g.x(), g.w(), ps);
  KappaRule kr = kappa_rule(cfg.get_double("lattice", "kappa_max", 20.0),
                            cfg.get_double("lattice", "kappa_panel", 0.1),
                            cfg.get_int("lattice", "kappa_order", 10));
  SpectralWaveOps ops(P, proj, g.x(), g.w(), kr, cfg.get_double("tolerances", "min_abs_e", 1e-6));
  WaveDiagnostics d = verify_completeness(ops, Q);
  IntertwiningDiagnostics it = verify_intertwining(P, g, ops, Q, {cplx(0, 2), cplx(0, -2)});

  const bool has_p = !ks.empty();
  json checks = json::array();
  checks.push_back(check("zw_minus_identity", d.zw_defect, cfg.get_double("tolerances", "zw", 1e-3)));
  checks.push_back(check("wz_minus_complement", d.wz_defect,
                         cfg.get_double("tolerances", "wz", has_p ? 5e-3 : 1e-3)));
  if (has_p) {
    checks.push_back(check("z_kernel", d.kernel_defect, cfg.get_double("tolerances", "kernel", 1e-4)));
    checks.push_back(check("w_range", d.range_defect, cfg.get_double("tolerances", "range", 1e-4)));
  }
  for (size_t i = 0; i < it.lambda.size(); ++i)
    checks.push_back(check("intertwining_" + std::to_string(i), it.defect[i],
                           cfg.get_double("tolerances", "intertwining", 1e-3)));
  checks.push_back(check("spectral_matrix_gap", it.spectral_matrix_gap,
                         cfg.get_double("tolerances", "spectral", 1e-2)));
  checks.push_back(check("spectral_distance", it.spectral_distance,
                         cfg.get_double("tolerances", "spectral", 1e-2)));

  json j = report_header("waveops", cfg);
  j["eigenvalues"] = json::array();
  for (cplx k : ks) j["eigenvalues"].push_back(to_json(k * k));
  j["test_dim"] = d.test_dim;
  j["min_abs_e_real_axis"] = ops.min_abs_e();
  j["w_norm"] = d.w_norm;
  j["w_minus_identity"] = d.w_minus_identity;
  j["checks"] = checks;
  CommandOutput out;
  out.report = j;
  out.exit_code = exit_from(checks);
  return out;
}

CommandOutput cmd_evolve_compare(const RunConfig& cfg) {
  Potential P = potential_from_config(cfg);
  SpectralReport rep = spectral_report(P, spectrum_options(cfg));
  std::vector<cplx> ks = eigen_ks(rep);
  UniformGrid ug(cfg.get_double("evolve", "x_max", 200.0), cfg.get_int("evolve", "nu", 4096));
  SplitStepOptions so;
  so.dt_max = cfg.get_double("evolve", "dt", so.dt_max);
  Propagator prop(P, ug, so);
  RankOneSum proj = rank_one_on(P, ks, ug.x, ug.w, ug.X);
  VecC phi = wave_packet(ug.x, cfg.get_double("evolve", "center", 12.0),
                         cfg.get_double("evolve", "k", -2.0), cfg.get_double("evolve", "sigma", 2.5));
  NonstationaryOptions no;
  no.t_ladder = cfg.get_list("evolve", "t_ladder", no.t_ladder);
  double tmax = *std::max_element(no.t_ladder.begin(), no.t_ladder.end());
  // Size check before the stationary operators are built.
  check_domain(ug, prop.free(phi, -tmax), no.escape_tol, suggest_x_max(ug, phi, tmax));
  KappaRule kr = kappa_rule(cfg.get_double("evolve", "kappa_max", 6.0),
                            cfg.get_double("evolve", "kappa_panel", 0.02), 10);
  SpectralWaveOps ops(P, proj, ug.x, ug.w, kr);
  VecC wphi = ops.W(phi);
  VecC zphi = ops.Z(phi);
  NonstationaryResult r = nonstationary_check(prop, proj, phi, wphi, zphi, no);
  CookResult cook = cook_tail(P, ug, phi, cfg.get_double("evolve", "cook_t_max", 40.0), so.dt_max,
                              no.t_ladder);
  const double tol = cfg.get_double("tolerances", "nonstationary", 1e-2);

  json checks = json::array();
  checks.push_back(check("w_final", r.w_defect.back(), tol));
  checks.push_back(check("z_final", r.z_defect.back(), tol));
  checks.push_back(check("w_not_monotone", r.w_monotone ? 0.0 : 1.0, 0.0));
  checks.push_back(check("z_not_monotone", r.z_monotone ? 0.0 : 1.0, 0.0));
  json table = json::array();
  std::ostringstream csv;
  csv.precision(12);
  csv << "t,w_defect,z_defect\n";
  for (size_t i = 0; i < r.t.size(); ++i) {
    table.push_back({{"t", r.t[i]}, {"w_defect", r.w_defect[i]}, {"z_defect", r.z_defect[i]}});
    csv << r.t[i] << "," << r.w_defect[i] << "," << r.z_defect[i] << "\n";
  }
  json ct = json::array();
  for (size_t i = 0; i < cook.s.size(); ++i) ct.push_back({{"s", cook.s[i]}, {"tail", cook.tail[i]}});
  json j = report_header("evolve-compare", cfg);
  j["phi_norm"] = r.phi_norm;
  j["w_minus_phi"] = ug.norm(wphi - phi) / r.phi_norm;
  j["table"] = table;
  j["cook_total"] = cook.total;
  j["cook_tail"] = ct;
  j["checks"] = checks;
  CommandOutput out;
  out.report = j;
  out.csv = csv.str();
  out.exit_code = exit_from(checks);
  return out;
}

}  // namespace hl::cli
