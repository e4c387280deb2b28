#include "g2lab/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>

#include "g2lab/diffsystem.hpp"
#include "g2lab/g2.hpp"
#include "g2lab/parallel.hpp"

namespace g2lab {

namespace {

struct CaseOut {
  std::string suite, name, anchor;
  std::vector<ReportRecord> records;
  std::vector<Series> series;
  std::vector<SweepTable> sweeps;

  void add(const std::string& metric, double value, std::optional<double> expected = {},
           std::optional<double> tolerance = {}, const std::string& sub = "") {
    const MetricInfo& info = metric_info(metric);
    ReportRecord r;
    r.suite = suite;
    r.case_name = sub.empty() ? name : name + "/" + sub;
    r.anchor = anchor;
    r.metric = metric;
    r.value = value;
    r.expected = expected;
    r.kind = info.kind;
    r.tolerance = tolerance.value_or(info.tolerance);
    records.push_back(std::move(r));
  }
  Series& plot(const std::string& family, const std::string& sname, const std::string& x, const std::string& y) {
    series.push_back(Series{family, sname, x, y, {}});
    return series.back();
  }
};

struct Case {
  std::string suite, name, anchor;
  std::function<void(CaseOut&)> run;
};

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

AltForm random_three_form(std::uint64_t seed, std::uint64_t index, double scale) {
  std::mt19937_64 rng(stream_seed(seed, index));
  std::normal_distribution<double> nd(0.0, scale);
  AltForm a(3);
  for (double& x : a.c) x = nd(rng);
  return a;
}

bool wants(const SuiteConfig& c, const std::string& model) { return c.model == "all" || c.model == model; }

RadialGrid model_grid(const SuiteConfig& c, double lo, double hi, int nodes) {
  return RadialGrid(c.grid.lo.value_or(lo), c.grid.hi.value_or(hi), c.grid.nodes.value_or(nodes));
}

ShrinkerData flat_gaussian(const RadialGrid& grid) {
  ShrinkerData s = build_flat_cone(grid);
  s.model.f_coef = 0.25;
  s.f = sample_potential(s.model, grid);
  s.lambda = -1.5;
  return s;
}

std::vector<double> five_taus(double tau, double d) { return {tau - 2 * d, tau - d, tau, tau + d, tau + 2 * d}; }

// ---------------------------------------------------------------- algebra

void algebra_cases(const SuiteConfig& c, std::vector<Case>& out) {
  const std::uint64_t seed = c.seed;
  out.push_back({"algebra", "calibration", "algebra.calibration", [](CaseOut& o) {
                   const ThreeForm p = standard_phi();
                   const Metric7 g = metric_from_phi(p);
                   double e = 0.0;
                   for (int i = 0; i < 7; ++i)
                     for (int j = 0; j < 7; ++j) e = std::max(e, std::abs(g.g[idx2(i, j)] - (i == j)));
                   o.add("metric_identity_error", e);
                   o.add("volume_error", g.vol - 1.0);
                   o.add("phi_norm2", form_norm2(g, p), 7.0);
                 }});
  const std::size_t nc = c.contraction_samples;
  out.push_back({"algebra", "contraction", "algebra.contraction", [seed, nc](CaseOut& o) {
                   const ThreeForm p = standard_phi();
                   std::vector<double> err(nc);
                   parallel_for(nc, [&](std::size_t i) {
                     err[i] = contraction_identity_error(p + random_three_form(seed, i, 0.1));
                   });
                   o.add("contraction_identity_error", max_abs(err));
                 }});
  out.push_back({"algebra", "scaling", "algebra.scaling", [seed](CaseOut& o) {
                   const ThreeForm ph = standard_phi() + random_three_form(seed, 1ull << 40, 0.1);
                   const double lam = 8.0;
                   const Metric7 g = metric_from_phi(ph), gl = metric_from_phi(lam * ph);
                   double em = 0.0, eh = 0.0, sh = 0.0;
                   for (int a = 0; a < 49; ++a) em = std::max(em, std::abs(gl.g[a] - 4.0 * g.g[a]) / 4.0);
                   const AltForm s = hodge_star(g, ph), sl = hodge_star(gl, lam * ph);
                   for (std::size_t r = 0; r < s.c.size(); ++r) {
                     eh = std::max(eh, std::abs(sl.c[r] - 16.0 * s.c[r]));
                     sh = std::max(sh, std::abs(16.0 * s.c[r]));
                   }
                   o.add("metric_scaling_error", em);
                   o.add("hodge_scaling_error", eh / sh);
                 }});
  out.push_back({"algebra", "volume_expansion", "algebra.volume_expansion", [seed](CaseOut& o) {
                   const ThreeForm p = standard_phi();
                   const AltForm dir = random_three_form(seed, (1ull << 40) + 1, 1.0);
                   const AltForm hat = (1.0 / std::sqrt(form_norm2(Metric7::identity(), dir))) * dir;
                   Series& s = o.plot("convergence", "volume_expansion", "log_gamma", "log_remainder");
                   for (int q = 0; q <= 8; ++q) {
                     const double t = 1e-3 * std::pow(10.0, 0.25 * q);
                     const AltForm gamma = t * hat;
                     const double rem =
                         std::abs(volume_ratio(p, gamma) - volume_second_order_expansion(decompose_three_form(gamma, p)));
                     s.points.emplace_back(std::log(t), std::log(rem));
                   }
                   o.add("remainder_slope", series_slope(s), 3.0);
                 }});
  const std::size_t ns = c.samples;
  const double eps = c.epsilon;
  out.push_back({"algebra", "perturbation_bound", "algebra.perturbation_bound", [seed, ns, eps](CaseOut& o) {
                   const ThreeForm p = standard_phi();
                   const auto r1 = perturbation_bound_sampler(p, eps, ns, seed);
                   const auto r2 = perturbation_bound_sampler(p, 0.5 * eps, ns, seed);
                   o.add("sup_metric", r1.sup_metric);
                   o.add("sup_inverse", r1.sup_inverse);
                   o.add("sup_hodge", r1.sup_hodge);
                   const double d = std::max({std::abs(r1.sup_metric / r2.sup_metric - 1.0),
                                              std::abs(r1.sup_inverse / r2.sup_inverse - 1.0),
                                              std::abs(r1.sup_hodge / r2.sup_hodge - 1.0)});
                   o.add("sampler_drift", d);
                 }});
}

// --------------------------------------------------------------- geometry

void geometry_cases(const SuiteConfig& c, std::vector<Case>& out) {
  if (wants(c, "fowdar")) {
    const RadialGrid grid = model_grid(c, -2.0, 4.0, 400);
    out.push_back({"geometry", "fowdar/invariants", "geometry.fowdar_invariants", [grid](CaseOut& o) {
                     const ModelSpec m = fowdar_model();
                     std::vector<double> R(grid.n), T2(grid.n);
                     parallel_for(std::size_t(grid.n), [&](std::size_t i) {
                       const auto G = model_geometry<2>(m, grid.node(int(i)));
                       R[i] = value(G.R);
                       T2[i] = value(torsion_norm2(truncate_dense<J<0>>(G.T), truncate_mat<J<0>>(G.met.ginv)));
                     });
                     auto worst = [](const std::vector<double>& v, double ref) {
                       double w = ref;
                       for (double x : v)
                         if (std::abs(x - ref) > std::abs(w - ref) || !std::isfinite(x)) w = x;
                       return w;
                     };
                     o.add("scalar_curvature", worst(R, -0.75), -0.75);
                     o.add("torsion_norm2", worst(T2, 0.75), 0.75);
                   }});
    out.push_back({"geometry", "fowdar/scaling", "geometry.torsion_scaling", [](CaseOut& o) {
                     RadialGrid grid(0.0, 4.0, 41);
                     const ShrinkerData fw = build_fowdar(grid);
                     FlowConfig cfg;
                     cfg.accuracy = 8;
                     TensorField p8 = fw.phi;
                     for (auto& v : p8.values)
                       for (double& x : v) x *= 8.0;
                     const auto T = torsion_from_phi(fw.phi, fw.model.link(), cfg);
                     const auto T8 = torsion_from_phi(p8, fw.model.link(), cfg);
                     const auto L = laplacian_flow_rhs(fw.phi, fw.model.link(), cfg);
                     const auto L8 = laplacian_flow_rhs(p8, fw.model.link(), cfg);
                     auto rel = [&](const TensorField& a, const TensorField& b) {
                       double e = 0.0, s = 0.0;
                       for (int i = 0; i < grid.n; ++i)
                         for (std::size_t k = 0; k < a.values[i].size(); ++k) {
                           e = std::max(e, std::abs(b.values[i][k] - 2.0 * a.values[i][k]));
                           s = std::max(s, std::abs(2.0 * a.values[i][k]));
                         }
                       return e / s;
                     };
                     o.add("torsion_scaling_error", rel(T, T8));
                     o.add("laplacian_scaling_error", rel(L, L8));
                   }});
  }
  if (wants(c, "flat"))
    out.push_back({"geometry", "flat/invariants", "geometry.flat_cone", [](CaseOut& o) {
                     const ModelSpec m = flat_cone_model();
                     double rm = 0.0, t = 0.0;
                     for (double r : {0.5, 1.0, 2.5, 7.0}) {
                       const auto G = model_geometry<3>(m, r);
                       for (const auto& v : G.Rm) rm = std::max(rm, std::abs(value(v)));
                       for (const auto& v : G.T) t = std::max(t, std::abs(value(v)));
                     }
                     o.add("riemann_norm", rm);
                     o.add("torsion_norm", t);
                   }});
  std::vector<std::pair<std::string, std::function<ModelSpec()>>> models;
  if (wants(c, "flat")) models.push_back({"flat", flat_cone_model});
  if (wants(c, "fowdar")) models.push_back({"fowdar", fowdar_model});
  if (wants(c, "synthetic"))
    models.push_back({"synthetic", [] { return synthetic_model(ConeData::s3xs3(), 2.0, 0.3, 5); }});
  for (const auto& [name, make] : models)
    out.push_back({"geometry", name + "/riemann_symmetry", "geometry.riemann_symmetry", [make](CaseOut& o) {
                     const ModelSpec m = make();
                     double e = 0.0;
                     for (double x : {2.2, 3.1, 6.0}) e = std::max(e, riemann_symmetry(values(model_geometry<2>(m, x).Rm)).max());
                     o.add("riemann_symmetry", e);
                   }});
}

// ------------------------------------------------------------------- flow

void flow_cases(const SuiteConfig& c, std::vector<Case>& out) {
  if (wants(c, "flat"))
    out.push_back({"flow", "flat/stationary", "flow.flat_stationary", [](CaseOut& o) {
                     const ShrinkerData flat = build_flat_cone(RadialGrid(1.0, 3.0, 21));
                     o.add("flow_rhs_norm", max_abs([&] {
                             std::vector<double> v;
                             for (const auto& n : laplacian_flow_rhs(flat.phi, flat.model.link()).values)
                               v.insert(v.end(), n.begin(), n.end());
                             return v;
                           }()));
                   }});
  if (!wants(c, "fowdar")) return;
  auto fowdar_cfg = [](int accuracy) {
    FlowConfig cfg;
    cfg.accuracy = accuracy;
    cfg.boundary = BoundaryPolicy::exact;
    cfg.exact = fowdar_forward_exact;
    cfg.closed_tol = 1e-6;
    return cfg;
  };
  out.push_back({"flow", "fowdar/rk4_step", "flow.rk4_step", [fowdar_cfg](CaseOut& o) {
                   RadialGrid grid(0.0, 4.0, 41);
                   const ShrinkerData fw = build_fowdar(grid);
                   const FlowConfig cfg = fowdar_cfg(8);
                   const FlowState s{fw.phi, &fw.model.link(), 0.0};
                   const double b = stability_bound(s, cfg);
                   Series& ser = o.plot("convergence", "rk4_step", "log_dt", "log_error");
                   std::vector<double> err;
                   for (int m : {1, 2, 4}) {
                     const FlowState s1 = step_flow(s, b / m, Direction::forward, cfg);
                     double e = 0.0;
                     for (int i = 0; i < grid.n; ++i) {
                       const auto ex = fowdar_forward_exact(b / m, grid.node(i));
                       for (int a = 0; a < 343; ++a) e = std::max(e, std::abs(ex[a] - s1.phi.values[i][a]));
                     }
                     err.push_back(e);
                     ser.points.emplace_back(std::log(b / m), std::log(e));
                   }
                   o.add("step_error", err[0]);
                   o.add("fitted_order", series_slope(ser), {}, 4.5);
                 }});
  out.push_back({"flow", "fowdar/metric_evolution", "flow.metric_evolution", [fowdar_cfg](CaseOut& o) {
                   RadialGrid grid(0.0, 4.0, 41);
                   const ShrinkerData fw = build_fowdar(grid);
                   const FlowConfig cfg = fowdar_cfg(4);
                   const FlowState s{fw.phi, &fw.model.link(), 0.0};
                   const double b = stability_bound(s, cfg);
                   Series& ser = o.plot("convergence", "metric_evolution", "log_dt", "log_residual");
                   std::vector<double> res;
                   bool increasing = true;
                   for (int m : {1, 2, 4}) {
                     const int steps = int(std::ceil(0.02 / (b / m)));
                     const double dt = 0.02 / steps;
                     const auto rep = evolution_cross_check(integrate_flow(s, dt, steps, Direction::forward, cfg), cfg);
                     increasing = increasing && rep.volume_increasing;
                     res.push_back(rep.metric_residual);
                     ser.points.emplace_back(std::log(dt), std::log(rep.metric_residual));
                     o.add("metric_residual", rep.metric_residual, {}, {}, "refine=" + std::to_string(m));
                   }
                   o.add("fitted_order", series_slope(ser), {}, 3.5);
                   o.add("min_pairwise_order", std::min(std::log2(res[0] / res[1]), std::log2(res[1] / res[2])), {}, 3.5);
                   o.add("volume_increasing", increasing ? 1.0 : 0.0, 1.0);
                 }});
}

// --------------------------------------------------------------- shrinker

void shrinker_cases(const SuiteConfig& c, std::vector<Case>& out) {
  if (wants(c, "fowdar")) {
    const RadialGrid grid = model_grid(c, -2.0, 4.0, 400);
    out.push_back({"shrinker", "fowdar/soliton", "shrinker.fowdar_soliton", [grid](CaseOut& o) {
                     const ShrinkerData s = build_fowdar(grid);
                     const auto r = soliton_residuals(s);
                     std::vector<double> R(grid.n);
                     parallel_for(std::size_t(grid.n), [&](std::size_t i) {
                       R[i] = value(model_geometry<2>(s.model, grid.node(int(i))).R);
                     });
                     double wr = -0.75, wl = 5.0 / 3.0;
                     for (double x : R)
                       if (!(std::abs(x + 0.75) <= std::abs(wr + 0.75))) wr = x;
                     for (double x : r.laplacian_f)
                       if (!(std::abs(x - 5.0 / 3.0) <= std::abs(wl - 5.0 / 3.0))) wl = x;
                     o.add("scalar_curvature", wr, -0.75);
                     o.add("soliton_phi_residual", r.phi_sup);
                     o.add("soliton_metric_residual", r.metric_sup);
                     o.add("trace_residual", r.trace_sup);
                     o.add("laplacian_f", wl, 5.0 / 3.0);
                   }});
  }
  if (wants(c, "flat")) {
    const RadialGrid grid = model_grid(c, 1.0, 5.0, 21);
    out.push_back({"shrinker", "flat/gaussian", "shrinker.flat_gaussian", [grid](CaseOut& o) {
                     const ShrinkerData s = flat_gaussian(grid);
                     const auto r = soliton_residuals(s);
                     o.add("soliton_phi_residual", r.phi_sup, {}, 1e-9);
                     o.add("soliton_metric_residual", r.metric_sup, {}, 1e-9);
                     o.add("trace_residual", r.trace_sup, {}, 1e-9);
                     double wl = 3.5;
                     for (double x : r.laplacian_f)
                       if (!(std::abs(x - 3.5) <= std::abs(wl - 3.5))) wl = x;
                     o.add("laplacian_f", wl, 3.5, 1e-10);
                     o.add("E_sup", max_abs(E_identities(s).E));
                     const auto flow = self_similar_flow(s, {1.0, 0.5, 0.25, 0.1});
                     double h = 0.0;
                     for (const auto& st : flow.states)
                       for (int i = 0; i < grid.n; ++i) h = std::max(h, std::abs(st.h.values[i][0] - grid.node(i)));
                     o.add("h_minus_r", h);
                   }});
  }
  if (wants(c, "synthetic"))
    out.push_back({"shrinker", "synthetic/backward_flow", "shrinker.synthetic_backward_flow", [](CaseOut& o) {
                     const ModelSpec m = synthetic_model(ConeData::s3xs3(), 2.0, 0.3, 9);
                     RadialGrid grid(3.0, 12.0, 19);
                     ShrinkerData d;
                     d.model = m;
                     d.phi = sample_phi(m, grid);
                     d.f = sample_potential(m, grid);
                     const auto flow = self_similar_flow(d, {1.0, 0.5, 0.25, 0.125, 0.0625});
                     o.add("envelope_violations", radial_envelope(flow).violations, 0.0);
                     const auto h = h_identities(flow);
                     o.add("comparability", h.comparability.value_or(std::nan("")));
                   }});
}

// ------------------------------------------------------------- diffsystem

void diffsystem_cases(const SuiteConfig& c, std::vector<Case>& out) {
  const int n0 = c.diff_nodes;
  out.push_back({"diffsystem", "synthetic_pair/constants", "diffsystem.residual_constants", [n0](CaseOut& o) {
                   const ModelSpec ma = synthetic_model(ConeData::s3xs3(), 2.0, 0.3, 11);
                   const ModelSpec mb = synthetic_model(ConeData::s3xs3(), 2.0, 0.3, 12);
                   FlowConfig cfg;
                   cfg.accuracy = 6;
                   cfg.boundary = BoundaryPolicy::free;
                   cfg.closed_tol = 1e-4;
                   DiffOptions opt;
                   opt.accuracy = 6;
                   std::vector<double> C;
                   for (int n : {n0, 2 * n0 - 1}) {
                     RadialGrid grid(3.0, 9.0, n);
                     std::vector<FlowState> A{FlowState{sample_phi(ma, grid), &ma.link(), 0.0}};
                     std::vector<FlowState> B{FlowState{sample_phi(mb, grid), &mb.link(), 0.0}};
                     const double dtau = 0.004;
                     const int sub =
                         int(std::ceil(dtau / std::min(stability_bound(A[0], cfg), stability_bound(B[0], cfg))));
                     for (int k = 0; k < 4; ++k) {
                       FlowState x = A.back(), y = B.back();
                       for (int q = 0; q < sub; ++q) {
                         x = step_flow(x, dtau / sub, Direction::backward, cfg);
                         y = step_flow(y, dtau / sub, Direction::backward, cfg);
                       }
                       A.push_back(x);
                       B.push_back(y);
                     }
                     FitOptions fit;
                     fit.margin = int(std::ceil((n - 1) / 6.0));
                     const auto fc = system_residual_constants(difference_sequence(A, B, opt), fit);
                     C.push_back(fc.C);
                     o.add("fitted_constant", fc.C, {}, {}, "n=" + std::to_string(n));
                   }
                   o.add("constant_drift", std::abs(C[1] / C[0] - 1.0));
                 }});
  out.push_back({"diffsystem", "synthetic_pair/decay", "diffsystem.block_decay", [](CaseOut& o) {
                   const ModelSpec a = synthetic_model(ConeData::s3xs3(), 2.0, 0.3, 11);
                   const ModelSpec b = synthetic_model(ConeData::s3xs3(), 2.0, 0.3, 12);
                   const BlockDecay p = decay_profile(build_differences(a, b, RadialGrid(4.0, 256.0, 49, Spacing::log)));
                   for (int k = 0; k < kBlocks; ++k) {
                     o.add("block_exponent", p.exponent[k], {}, {}, block_name(k));
                     Series& s = o.plot("block_decay", block_name(k), "log_r", "log_sup");
                     for (std::size_t q = 0; q < p.annuli.size(); ++q)
                       s.points.emplace_back(std::log(p.annuli[q].first), std::log(p.sup[q][k]));
                   }
                 }});
}

// --------------------------------------------------------------- carleman

// Golden-section maximization of -k log s - rho^2 / (c s) over log s.
double numeric_stirling_max(int k, double rho, double c) {
  auto f = [&](double x) { return -k * x - rho * rho / (c * std::exp(x)); };
  double lo = std::log(rho * rho / (c * k)) - 5.0, hi = lo + 10.0;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 200; ++it) {
    const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
    if (f(a) > f(b))
      hi = b;
    else
      lo = a;
  }
  return std::exp(f(0.5 * (lo + hi)));
}

std::string num_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

void carleman_cases(const SuiteConfig& c, std::vector<Case>& out) {
  out.push_back({"carleman", "flat/heat_kernel", "carleman.heat_kernel", [](CaseOut& o) {
                   const auto flow = self_similar_flow(flat_gaussian(RadialGrid(1.0, 4.0, 13)), five_taus(0.5, 5e-4));
                   o.add("heat_kernel_residual", heat_kernel_residual(flow));
                 }});
  out.push_back({"carleman", "fowdar/h2_formula", "carleman.h2_formula", [](CaseOut& o) {
                   const ShrinkerData fw = normalize_dilation(build_fowdar(RadialGrid(0.0, 3.0, 13)));
                   Series& s = o.plot("convergence", "h2_formula", "log_dtau", "log_gap");
                   H2HeatCheck last;
                   for (double d : {0.01, 0.005}) {
                     last = h2_conjugate_heat_check(self_similar_flow(fw, five_taus(0.5, d)), 0.05, 2.5);
                     s.points.emplace_back(std::log(d), std::log(last.derived_gap));
                   }
                   o.add("h2_formula_gap", last.derived_gap);
                   o.add("h2_stated_gap", last.stated_gap);
                   o.add("fitted_order", series_slope(s), {}, 3.5);
                 }});
  const auto nodes = c.carleman.divergence_nodes;
  out.push_back({"carleman", "divergence_identity", "carleman.divergence_identity", [nodes](CaseOut& o) {
                   Series& s = o.plot("convergence", "divergence_identity", "log_h", "log_residual");
                   double finest = 0.0;
                   for (int n : nodes) {
                     SpaceTimeGrid g;
                     g.nr = g.nt = n;
                     const auto Z = ScalarSpaceTimeField::sample(g, [](double r, double t) {
                       const double x = (r - 2.0) / 0.8;
                       return std::abs(x) < 1.0 ? t * std::exp(-1.0 / (1.0 - x * x)) : 0.0;
                     });
                     const auto H = tabulate_H2(g, 0.3, 2.0);
                     const auto F = ScalarSpaceTimeField::sample(g, [](double r, double t) { return 0.3 + 0.1 * r * t; });
                     finest = divergence_identity_residual(Z, H, F, 4).residual;
                     s.points.emplace_back(std::log((g.r_hi - g.r_lo) / (n - 1)), std::log(finest));
                   }
                   o.add("divergence_residual", finest);
                   o.add("fitted_order", series_slope(s), {}, 1.9);
                 }});
  const CarlemanConfig k = c.carleman;
  for (const auto& fname : k.functions)
    out.push_back({"carleman", "ratio_sweep/" + fname, "carleman.ratio_sweep", [k, fname](CaseOut& o) {
                     const TestFunction u = named_test_function(fname);
                     CarlemanParams base;
                     base.n = k.n;
                     base.gamma = k.gamma;
                     base.delta = k.delta;
                     base.eta = k.eta;
                     base.kernel_denominator = k.denominator;
                     SweepRanges ranges;
                     ranges.alphas = k.alphas;
                     ranges.as = k.as;
                     ranges.rhos = k.rhos;
                     QuadratureOptions q;
                     q.r_nodes = k.r_nodes;
                     const auto rows = carleman_sweep(u, base, k.variant, ranges, q);
                     QuadratureOptions q2 = q;
                     q2.refine = 2;
                     const auto fine = carleman_sweep(u, base, k.variant, ranges, q2);
                     int nonfinite = 0;
                     double lo = INFINITY, hi = 0.0, gap = 0.0, variation = 1.0;
                     for (std::size_t i = 0; i < rows.size(); ++i) {
                       const auto r = rows[i].result.ratio(), f = fine[i].result.ratio();
                       if (!r || !std::isfinite(*r) || !f || !std::isfinite(*f)) {
                         ++nonfinite;
                         continue;
                       }
                       lo = std::min(lo, *r);
                       hi = std::max(hi, *r);
                       gap = std::max(gap, std::abs(*r / *f - 1.0));
                     }
                     for (double a : k.as)
                       for (double rho : k.rhos) {
                         double glo = INFINITY, ghi = 0.0;
                         Series& s = o.plot("ratio_sweep", fname + "/a=" + num_label(a) + ",rho=" + num_label(rho), "alpha", "ratio");
                         for (const auto& row : rows)
                           if (row.params.a == a && row.params.rho == rho && row.result.ratio()) {
                             const double r = *row.result.ratio();
                             glo = std::min(glo, r);
                             ghi = std::max(ghi, r);
                             s.points.emplace_back(row.params.alpha, r);
                           }
                         if (ghi > 0.0) variation = std::max(variation, ghi / glo);
                       }
                     o.add("nonfinite_ratios", nonfinite, 0.0);
                     o.add("min_ratio", lo);
                     o.add("max_ratio", hi);
                     o.add("ratio_variation", nonfinite ? std::nan("") : variation);
                     o.add("refinement_gap", gap);
                     o.sweeps.push_back({fname, rows});
                   }});
  for (double s : k.decay_s) {
    const int n = k.n;
    out.push_back({"carleman", "decay/s=" + num_label(s), "carleman.decay", [s, n](CaseOut& o) {
                     const auto fit = exp_decay_experiment(backward_heat_kernel(0.25, n), {3, 4, 5, 6, 7, 8}, s, n);
                     Series& ser = o.plot("decay", "s=" + num_label(s), "rho2", "log_norm");
                     for (std::size_t q = 0; q < fit.rho2.size(); ++q) ser.points.emplace_back(fit.rho2[q], fit.log_norm[q]);
                     o.add("decay_slope", fit.slope);
                     o.add("decay_r2", fit.r2);
                   }});
  }
  out.push_back({"carleman", "stirling", "carleman.stirling", [](CaseOut& o) {
                   double gap = 0.0;
                   for (double cc : {18.0, 20.0})
                     for (int kk = 1; kk <= 10; ++kk)
                       for (double rho : {2.0, 5.0, 10.0}) {
                         const auto b = stirling_bound(kk, rho, cc);
                         gap = std::max(gap, std::abs(numeric_stirling_max(kk, rho, cc) / b.exact_max - 1.0));
                       }
                   o.add("stirling_gap", gap);
                   for (double cc : {18.0, 20.0}) o.add("stirling_min_constant", stirling_min_constant(cc, 10), {}, {}, "c=" + num_label(cc));
                 }});
  out.push_back({"carleman", "cutoff", "carleman.cutoff", [](CaseOut& o) {
                   for (double rho : {50.0, 100.0, 200.0})
                     o.add("cutoff_constant", cutoff_constant(cutoff_psi(rho, 8.0 * rho)), {}, {}, "rho=" + num_label(rho));
                 }});
}

}  // namespace

TestFunction named_test_function(const std::string& name) {
  if (name == "centred") return bump_test_function(name, 20.0, 4.0);
  if (name == "inner") return bump_test_function(name, 10.0, 3.0);
  if (name == "quadratic") return bump_test_function(name, 25.0, 5.0, 2);
  if (name == "oscillating") return bump_test_function(name, 20.0, 8.0, 1, 1.0);
  if (name == "narrow") return bump_test_function(name, 14.0, 2.0);
  throw std::invalid_argument("unknown test function '" + name + "'");
}

SuiteReport run_suite(const SuiteConfig& config) {
  for (const auto& [m, _] : config.tolerances)
    if (!is_known_metric(m)) throw ConfigError(0, "tolerance." + m, "unknown metric");
  if (std::find(suite_names().begin(), suite_names().end(), config.suite) == suite_names().end())
    throw ConfigError(0, "run.suite", "unknown suite '" + config.suite + "'");
  const bool all = config.suite == "all";
  std::vector<Case> cases;
  if (all || config.suite == "algebra") algebra_cases(config, cases);
  if (all || config.suite == "geometry") geometry_cases(config, cases);
  if (all || config.suite == "flow") flow_cases(config, cases);
  if (all || config.suite == "shrinker") shrinker_cases(config, cases);
  if (all || config.suite == "diffsystem") diffsystem_cases(config, cases);
  if (all || config.suite == "carleman") carleman_cases(config, cases);

  std::vector<CaseOut> outs(cases.size());
  parallel_for(cases.size(), [&](std::size_t i) {
    CaseOut& o = outs[i];
    o.suite = cases[i].suite;
    o.name = cases[i].name;
    o.anchor = cases[i].anchor;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      cases[i].run(o);
    } catch (const std::exception&) {
      o.records.clear();
      o.series.clear();
      o.sweeps.clear();
      o.anchor = "run.case_error";
      o.add("case_error", 1.0, 0.0);
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (auto& r : o.records) r.wall_time = dt;
  });

  std::vector<std::size_t> order(cases.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::tie(cases[a].suite, cases[a].name) < std::tie(cases[b].suite, cases[b].name);
  });
  SuiteReport rep;
  rep.suite = config.suite;
  rep.seed = config.seed;
  rep.config_hash = config_hash(config);
  for (std::size_t i : order) {
    for (auto r : outs[i].records) {
      if (const auto it = config.tolerances.find(r.metric); it != config.tolerances.end()) r.tolerance = it->second;
      r.pass = evaluate_pass(r);
      rep.records.push_back(std::move(r));
    }
    for (auto& s : outs[i].series) rep.series.push_back(std::move(s));
    for (auto& t : outs[i].sweeps) rep.sweeps.push_back(std::move(t));
  }
  return rep;
}

}  // namespace g2lab
