// Acceptance checks: one line per criterion, with the measured quantities and
// the wall time against its budget. Exit status is nonzero when a criterion
// fails, except for the ones listed in kKnownFailures, which are reported as
// FAIL (known) and explained in the README.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "carleman_oracle.hpp"
#include "g2lab/diffsystem.hpp"
#include "g2lab/g2.hpp"
#include "g2lab/suites.hpp"

using namespace g2lab;

namespace {

const std::set<int> kKnownFailures{10};

struct Outcome {
  bool pass = true;
  std::string detail;
  void need(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!ok) detail += " [failed: " + what + "]";
  }
  void note(const char* fmt, double x) {
    char buf[96];
    std::snprintf(buf, sizeof buf, fmt, x);
    detail += ' ';
    detail += buf;
  }
};

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

AltForm random_form(std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  AltForm a(3);
  for (double& x : a.c) x = nd(rng);
  return a;
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i] / n, my += y[i] / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxx += (x[i] - mx) * (x[i] - mx), sxy += (x[i] - mx) * (y[i] - my);
  return sxy / sxx;
}

ShrinkerData flat_gaussian(const RadialGrid& grid) {
  ShrinkerData s = build_flat_cone(grid);
  s.model.f_coef = 0.25;
  s.f = sample_potential(s.model, grid);
  s.lambda = -1.5;
  return s;
}

TensorField scaled(const TensorField& f, double c) {
  TensorField r = f;
  for (auto& v : r.values)
    for (double& x : v) x *= c;
  return r;
}

double rel_field_gap(const TensorField& a, const TensorField& b, double factor) {
  double e = 0.0, s = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    for (std::size_t k = 0; k < a.values[i].size(); ++k) {
      e = std::max(e, std::abs(b.values[i][k] - factor * a.values[i][k]));
      s = std::max(s, std::abs(factor * a.values[i][k]));
    }
  return e / s;
}

Outcome c1() {
  Outcome o;
  const ThreeForm p = standard_phi();
  const Metric7 g = metric_from_phi(p);
  double e = 0.0;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) e = std::max(e, std::abs(g.g[idx2(i, j)] - (i == j ? 1.0 : 0.0)));
  o.note("|g - I| = %.2e", e);
  o.note("vol - 1 = %.2e", g.vol - 1.0);
  o.note("|phi0|^2 = %.15g", form_norm2(g, p));
  o.need(e <= 1e-12, "metric");
  o.need(std::abs(g.vol - 1.0) <= 1e-12, "volume");
  o.need(std::abs(form_norm2(g, p) - 7.0) <= 1e-12, "norm");
  return o;
}

// Contraction evaluated directly from dense components.
double contraction_oracle(const ThreeForm& phi) {
  const Metric7 g = metric_from_phi(phi);
  const Dense<double> P = phi.dense();
  double e = 0.0, s = 0.0;
  for (int k = 0; k < 7; ++k)
    for (int l = 0; l < 7; ++l) {
      double acc = 0.0;
      for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j)
          for (int a = 0; a < 7; ++a)
            for (int b = 0; b < 7; ++b)
              acc += P[idx3(i, j, k)] * P[idx3(a, b, l)] * g.ginv[idx2(i, a)] * g.ginv[idx2(j, b)];
      e = std::max(e, std::abs(acc - 6.0 * g.g[idx2(k, l)]));
      s = std::max(s, std::abs(6.0 * g.g[idx2(k, l)]));
    }
  return e / s;
}

Outcome c2() {
  Outcome o;
  std::mt19937_64 rng(2024);
  double lib = 0.0, orc = 0.0;
  int degenerate = 0;
  for (int i = 0; i < 1000; ++i) {
    const ThreeForm phi = standard_phi() + random_form(rng, 0.1);
    if (!is_nondegenerate(phi)) {
      ++degenerate;
      continue;
    }
    lib = std::max(lib, contraction_identity_error(phi));
    orc = std::max(orc, contraction_oracle(phi));
  }
  o.note("library %.2e", lib);
  o.note("oracle %.2e", orc);
  o.need(degenerate == 0, "degenerate samples");
  o.need(lib <= 1e-8 && orc <= 1e-8, "relative error");
  return o;
}

Outcome c3() {
  Outcome o;
  const double lam = 8.0;
  std::mt19937_64 rng(7);
  double em = 0.0, eh = 0.0;
  for (int q = 0; q < 20; ++q) {
    const ThreeForm ph = standard_phi() + random_form(rng, 0.1);
    const Metric7 g = metric_from_phi(ph), gl = metric_from_phi(lam * ph);
    for (int a = 0; a < 49; ++a) em = std::max(em, std::abs(gl.g[a] - 4.0 * g.g[a]) / 4.0);
    const AltForm s = hodge_star(g, ph), sl = hodge_star(gl, lam * ph);
    double sc = 0.0, d = 0.0;
    for (std::size_t r = 0; r < s.c.size(); ++r) {
      d = std::max(d, std::abs(sl.c[r] - 16.0 * s.c[r]));
      sc = std::max(sc, std::abs(16.0 * s.c[r]));
    }
    eh = std::max(eh, d / sc);
  }
  RadialGrid grid(0.0, 4.0, 41);
  const ShrinkerData fw = build_fowdar(grid);
  FlowConfig cfg;
  cfg.accuracy = 8;
  const TensorField p8 = scaled(fw.phi, lam);
  const double et = rel_field_gap(torsion_from_phi(fw.phi, fw.model.link(), cfg), torsion_from_phi(p8, fw.model.link(), cfg), 2.0);
  const double el = rel_field_gap(laplacian_flow_rhs(fw.phi, fw.model.link(), cfg), laplacian_flow_rhs(p8, fw.model.link(), cfg), 2.0);
  o.note("metric %.1e", em);
  o.note("torsion %.1e", et);
  o.note("hodge %.1e", eh);
  o.note("laplacian %.1e", el);
  o.need(em <= 1e-10 && et <= 1e-10 && eh <= 1e-10 && el <= 1e-10, "scaling");
  return o;
}

double log_vol(const ModelSpec& m, double x) {
  return std::log(value(metric_from_phi_dense(values(model_at<0>(m, x).phi)).vol));
}

Outcome c4() {
  Outcome o;
  RadialGrid grid(-2.0, 4.0, 400);
  const ShrinkerData s = build_fowdar(grid);
  double er = 0.0, et = 0.0, eo = 0.0, ef = 0.0;
  for (int i = 0; i < grid.n; ++i) {
    const auto G = model_geometry<2>(s.model, grid.node(i));
    er = std::max(er, std::abs(value(G.R) + 0.75));
    et = std::max(et, std::abs(value(torsion_norm2(truncate_dense<J<0>>(G.T), truncate_mat<J<0>>(G.met.ginv))) - 0.75));
  }
  const auto r = soliton_residuals(s);
  for (int i = 0; i < grid.n; ++i) {
    const double x = grid.node(i);
    // Delta f = f' (log sqrt det g)' for radial f; log sqrt det g is linear here.
    const double oracle = 2.5 * (log_vol(s.model, x + 0.1) - log_vol(s.model, x - 0.1)) / 0.2;
    eo = std::max(eo, std::abs(r.laplacian_f[i] - oracle));
    ef = std::max(ef, std::abs(r.laplacian_f[i] - 5.0 / 3.0));
  }
  o.note("|R + 3/4| = %.1e", er);
  o.note("||T|^2 - 3/4| = %.1e", et);
  o.note("soliton %.1e", r.phi_sup);
  o.note("|Df - 5/3| = %.1e", ef);
  o.note("|Df - oracle| = %.1e", eo);
  o.need(s.lambda == -0.5, "lambda");
  o.need(er <= 1e-8 && et <= 1e-8, "curvature");
  o.need(r.phi_sup <= 1e-6, "soliton residual");
  o.need(ef <= 1e-8 && eo <= 1e-8, "laplacian of f");
  return o;
}

Outcome c5() {
  Outcome o;
  RadialGrid grid(1.0, 5.0, 21);
  const ShrinkerData s = flat_gaussian(grid);
  double ef = 0.0;
  for (int i = 0; i < grid.n; ++i) {
    const double r = grid.node(i);
    ef = std::max(ef, std::abs(s.f.values[i][0] - r * r / 4.0));
  }
  const auto res = soliton_residuals(s);
  double lap = 0.0;
  for (double x : res.laplacian_f) lap = std::max(lap, std::abs(x - 3.5));
  const double E = max_abs(E_identities(s).E);
  const auto flow = self_similar_flow(s, {1.0, 0.5, 0.25, 0.1});
  double h = 0.0;
  for (const auto& st : flow.states)
    for (int i = 0; i < grid.n; ++i) h = std::max(h, std::abs(st.h.values[i][0] - grid.node(i)));
  o.note("residuals %.1e", res.max());
  o.note("|Df - 7/2| = %.1e", lap);
  o.note("|E| = %.1e", E);
  o.note("|h - r| = %.1e", h);
  o.need(ef <= 1e-14, "potential");
  o.need(res.phi_sup <= 1e-9 && res.metric_sup <= 1e-9 && res.trace_sup <= 1e-9, "residuals");
  o.need(lap <= 1e-12, "laplacian");
  o.need(E <= 1e-12, "E");
  o.need(h <= 1e-10, "h");
  return o;
}

Outcome c6() {
  Outcome o;
  const ThreeForm p = standard_phi();
  std::mt19937_64 rng(6);
  double lo = INFINITY, hi = -INFINITY;
  for (int ray = 0; ray < 5; ++ray) {
    const AltForm dir = random_form(rng, 1.0);
    const AltForm hat = (1.0 / std::sqrt(form_norm2(Metric7::identity(), dir))) * dir;
    std::vector<double> xs, ys;
    for (int q = 0; q <= 8; ++q) {
      const double t = 1e-3 * std::pow(10.0, 0.25 * q);
      const AltForm gamma = t * hat;
      xs.push_back(std::log(t));
      ys.push_back(std::log(std::abs(volume_ratio(p, gamma) - volume_second_order_expansion(decompose_three_form(gamma, p)))));
    }
    const double k = slope(xs, ys);
    lo = std::min(lo, k);
    hi = std::max(hi, k);
  }
  o.note("slopes in [%.3f,", lo);
  o.note("%.3f]", hi);
  o.need(lo >= 2.7 && hi <= 3.3, "slope");
  return o;
}

Outcome c7() {
  Outcome o;
  const auto a = perturbation_bound_sampler(standard_phi(), 0.05, 10000, 1);
  const auto b = perturbation_bound_sampler(standard_phi(), 0.025, 10000, 1);
  const double d = std::max({std::abs(b.sup_metric / a.sup_metric - 1), std::abs(b.sup_inverse / a.sup_inverse - 1),
                             std::abs(b.sup_hodge / a.sup_hodge - 1)});
  o.note("C_metric %.4f", a.sup_metric);
  o.note("C_inverse %.4f", a.sup_inverse);
  o.note("C_hodge %.4f", a.sup_hodge);
  o.note("drift %.2e", d);
  o.need(std::isfinite(a.sup_metric) && std::isfinite(a.sup_inverse) && std::isfinite(a.sup_hodge), "finite");
  o.need(d < 0.2, "drift");
  return o;
}

Outcome c8() {
  Outcome o;
  RadialGrid grid(0.0, 4.0, 41);
  const ShrinkerData fw = build_fowdar(grid);
  FlowConfig cfg;
  cfg.accuracy = 4;
  cfg.boundary = BoundaryPolicy::exact;
  cfg.exact = fowdar_forward_exact;
  cfg.closed_tol = 1e-6;
  const FlowState s{fw.phi, &fw.model.link(), 0.0};
  const double b = stability_bound(s, cfg);
  std::vector<double> res;
  bool increasing = true;
  for (int m : {1, 2, 4}) {
    const int steps = int(std::ceil(0.02 / (b / m)));
    const auto traj = integrate_flow(s, 0.02 / steps, steps, Direction::forward, cfg);
    // Nodal volume from the stored phi, independent of the cross-check.
    for (std::size_t k = 1; k < traj.size(); ++k)
      for (int i = 0; i < grid.n; ++i) {
        const double v0 = value(metric_from_phi_dense(traj[k - 1].phi.values[i]).vol);
        const double v1 = value(metric_from_phi_dense(traj[k].phi.values[i]).vol);
        increasing = increasing && v1 > v0;
      }
    const auto rep = evolution_cross_check(traj, cfg);
    increasing = increasing && rep.volume_increasing;
    res.push_back(rep.metric_residual);
  }
  const double o1 = std::log2(res[0] / res[1]), o2 = std::log2(res[1] / res[2]);
  o.note("residuals %.2e", res[0]);
  o.note("%.2e", res[1]);
  o.note("%.2e", res[2]);
  o.note("orders %.2f", o1);
  o.note("%.2f", o2);
  o.need(std::min(o1, o2) >= 3.5, "order");
  o.need(increasing, "volume");
  return o;
}

Outcome c9() {
  Outcome o;
  std::vector<double> res;
  for (int n : {161, 321, 641}) {
    SpaceTimeGrid g;
    g.nr = g.nt = n;
    const auto Z = ScalarSpaceTimeField::sample(g, [](double r, double t) {
      const double x = (r - 2.0) / 0.8;
      return std::abs(x) < 1.0 ? t * std::exp(-1.0 / (1.0 - x * x)) : 0.0;
    });
    const auto H = tabulate_H2(g, 0.3, 2.0);
    const auto F = ScalarSpaceTimeField::sample(g, [](double r, double t) { return 0.3 + 0.1 * r * t; });
    res.push_back(divergence_identity_residual(Z, H, F, 4).residual);
  }
  const double o1 = std::log2(res[0] / res[1]), o2 = std::log2(res[1] / res[2]);
  o.note("residuals %.2e", res[0]);
  o.note("%.2e", res[1]);
  o.note("%.2e", res[2]);
  o.note("orders %.2f", o1);
  o.note("%.2f", o2);
  o.need(std::min(o1, o2) >= 1.9, "order");
  o.need(res[2] <= 1e-6, "finest residual");
  return o;
}

Outcome c10() {
  Outcome o;
  CarlemanParams base;
  base.n = 3;
  base.gamma = 1.0 / 12.0;
  SweepRanges ranges;
  ranges.alphas = {1, 2, 4, 8, 16, 32, 64};
  ranges.as = {0.01, 0.05, 0.1};
  ranges.rhos = {20.0};
  QuadratureOptions q;
  int nonfinite = 0;
  double worst_var = 1.0, worst_gap = 0.0;
  for (const auto& name : test_function_names()) {
    const TestFunction u = named_test_function(name);
    const auto rows = carleman_sweep(u, base, CarlemanVariant::gaussian, ranges, q);
    for (double a : ranges.as) {
      double lo = INFINITY, hi = 0.0;
      for (const auto& row : rows) {
        if (row.params.a != a) continue;
        const auto r = row.result.ratio();
        if (!r || !std::isfinite(*r)) {
          ++nonfinite;
          continue;
        }
        lo = std::min(lo, *r);
        hi = std::max(hi, *r);
        const int nt = 2 * std::max(q.min_t_nodes, int(std::ceil(q.t_nodes_per_efold * (2 * row.params.alpha + 1) *
                                                               std::log((1 + a) / a))));
        const double ref = oracle::gaussian_ratio(u, row.params, 2 * q.r_nodes - 1, nt);
        worst_gap = std::max(worst_gap, std::abs(*r / ref - 1.0));
      }
      if (hi > 0.0) worst_var = std::max(worst_var, hi / lo);
    }
  }
  o.note("nonfinite %.0f", nonfinite);
  o.note("max variation over alpha %.2fx", worst_var);
  o.note("oracle gap %.1e", worst_gap);
  o.need(nonfinite == 0, "finite");
  o.need(worst_var < 2.0, "variation < 2x");
  o.need(worst_gap <= 0.01, "oracle");
  return o;
}

Outcome c11() {
  Outcome o;
  const Subsolution u = backward_heat_kernel(0.25);
  for (double s : {0.05, 0.1, 0.2}) {
    const auto fit = exp_decay_experiment(u, {3, 4, 5, 6, 7, 8}, s);
    o.note("slope %.3f", fit.slope);
    o.note("R2 %.5f", fit.r2);
    o.need(fit.slope < 0.0 && fit.r2 >= 0.95, "fit");
  }
  return o;
}

double golden_max(int k, double rho, double c) {
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

Outcome c12() {
  Outcome o;
  double e = 0.0, es = 0.0, eg = 0.0;
  for (double c : {18.0, 20.0})
    for (int k = 1; k <= 10; ++k)
      for (double rho : {2.0, 5.0, 10.0}) {
        const auto b = stirling_bound(k, rho, c);
        const double closed = std::pow(rho, -2.0 * k) * std::pow(c * k, k) * std::exp(-double(k));
        e = std::max(e, std::abs(b.exact_max / closed - 1.0));
        es = std::max(es, std::abs(b.s_star / (rho * rho / (c * k)) - 1.0));
        eg = std::max(eg, std::abs(golden_max(k, rho, c) / closed - 1.0));
      }
  o.note("closed form %.1e", e);
  o.note("maximizer %.1e", es);
  o.note("numeric max %.1e", eg);
  o.need(e <= 1e-8 && es <= 1e-8 && eg <= 1e-8, "relative error");
  return o;
}

Outcome c13() {
  Outcome o;
  const ModelSpec ma = synthetic_model(ConeData::s3xs3(), 2.0, 0.3, 11);
  const ModelSpec mb = synthetic_model(ConeData::s3xs3(), 2.0, 0.3, 12);
  FlowConfig cfg;
  cfg.accuracy = 6;
  cfg.boundary = BoundaryPolicy::free;
  cfg.closed_tol = 1e-4;
  DiffOptions opt;
  opt.accuracy = 6;
  std::vector<double> C;
  for (int n : {33, 65}) {
    RadialGrid grid(3.0, 9.0, n);
    std::vector<FlowState> A{FlowState{sample_phi(ma, grid), &ma.link(), 0.0}};
    std::vector<FlowState> B{FlowState{sample_phi(mb, grid), &mb.link(), 0.0}};
    const double dtau = 0.004;
    const int sub = int(std::ceil(dtau / std::min(stability_bound(A[0], cfg), stability_bound(B[0], cfg))));
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
    o.note("C %.4f", fc.C);
    o.need(std::isfinite(fc.C) && fc.C > 0.0 && fc.excluded == 0, "fitted constant");
    C.push_back(fc.C);
  }
  const double drift = std::abs(C[1] / C[0] - 1.0);
  o.note("drift %.3f", drift);
  o.need(drift < 0.3, "stability under refinement");
  const BlockDecay p = decay_profile(build_differences(ma, mb, RadialGrid(4.0, 256.0, 49, Spacing::log)));
  const double worst = *std::max_element(p.exponent.begin(), p.exponent.end());
  o.note("max block exponent %.3f", worst);
  o.need(worst <= -1.7, "decay exponents");
  return o;
}

Outcome c14() {
  Outcome o;
  const auto flow = self_similar_flow(flat_gaussian(RadialGrid(1.0, 4.0, 13)), {0.5 - 1e-3, 0.5 - 5e-4, 0.5, 0.5 + 5e-4, 0.5 + 1e-3});
  const double r = heat_kernel_residual(flow);
  o.note("residual %.2e", r);
  o.need(r <= 1e-8, "residual");
  return o;
}

SuiteConfig small_config(const std::string& suite) {
  SuiteConfig c;
  c.suite = suite;
  c.seed = 99;
  c.samples = 400;
  c.contraction_samples = 50;
  c.diff_nodes = 25;
  c.carleman.functions = {"centred", "narrow"};
  c.carleman.alphas = {1, 4};
  c.carleman.as = {0.05};
  c.carleman.decay_s = {0.1};
  c.carleman.divergence_nodes = {41, 81};
  return c;
}

std::string render(const SuiteReport& r) {
  std::ostringstream os;
  write_json(os, r);
  write_csv(os, r);
  return os.str();
}

Outcome c15() {
  Outcome o;
  int identical = 0, total = 0;
  for (const auto& s : suite_names()) {
    if (s == "all") continue;
    const SuiteConfig c = small_config(s);
    const std::string a = render(run_suite(c)), b = render(run_suite(c));
    ++total;
    if (a == b) ++identical;
    else o.need(false, s);
  }
  SuiteConfig other = small_config("algebra");
  other.seed = 100;
  const bool seed_matters = render(run_suite(other)) != render(run_suite(small_config("algebra")));
  o.note("identical reruns %.0f", identical);
  o.note("of %.0f suites", total);
  o.need(seed_matters, "seed changes the sampled records");
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double budget;  // seconds
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> list{
      {1, "phi0 calibration", 1, c1},
      {2, "contraction identity", 10, c2},
      {3, "scaling laws", 5, c3},
      {4, "Fowdar shrinker", 10, c4},
      {5, "flat Gaussian", 5, c5},
      {6, "volume expansion remainder", 10, c6},
      {7, "perturbation sampler", 60, c7},
      {8, "metric evolution", 60, c8},
      {9, "divergence identity", 30, c9},
      {10, "Carleman ratio sweep", 120, c10},
      {11, "exponential decay", 60, c11},
      {12, "Stirling bound", 1, c12},
      {13, "difference system", 120, c13},
      {14, "conjugate heat kernel", 5, c14},
      {15, "determinism", 600, c15},
  };
  int unexpected = 0;
  for (const auto& c : list) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.need(false, std::string("exception: ") + e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    char budget[64];
    std::snprintf(budget, sizeof budget, " (%.2fs of %.0fs)", dt, c.budget);
    o.need(dt < c.budget, "runtime");
    const bool known = kKnownFailures.count(c.id) > 0;
    const char* status = o.pass ? "PASS" : (known ? "FAIL (known)" : "FAIL");
    std::printf("criterion %2d %-28s %s:%s%s\n", c.id, c.name, status, o.detail.c_str(), budget);
    std::fflush(stdout);
    if (!o.pass && !known) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
