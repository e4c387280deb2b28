#include "g2lab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "g2lab/parallel.hpp"

namespace g2lab {

namespace {

void check_closed(const TensorField& phi, const LinkSpec& link, const FlowConfig& cfg) {
  if (!cfg.check_closed) return;
  const double r = closedness_residual(phi, link, cfg.accuracy);
  if (!(r <= cfg.closed_tol))
    throw NotClosed("|d phi| = " + std::to_string(r) + " exceeds " + std::to_string(cfg.closed_tol));
}

// Delta phi at every node, without the closedness check.
std::vector<Dense<double>> rhs_values(const TensorField& phi, const LinkSpec& link, const StencilSet& st) {
  std::vector<Dense<double>> out(phi.grid.n);
  parallel_for(std::size_t(phi.grid.n), [&](std::size_t i) {
    const auto G = node_geometry<2>(nodal_jets<2>(phi, st, int(i)), link);
    const auto p0 = values(truncate_dense<J<0>>(G.phi));
    Mat7<double> h, gi;
    for (int a = 0; a < 49; ++a) {
      h[a] = value(G.h[a]);
      gi[a] = value(G.met.ginv[a]);
    }
    out[i] = i_phi_dense(p0, h, gi);
  });
  return out;
}

TensorField axpy(const TensorField& base, double a, const std::vector<Dense<double>>& k) {
  TensorField r = base;
  for (int i = 0; i < base.grid.n; ++i)
    for (std::size_t c = 0; c < r.values[i].size(); ++c) r.values[i][c] += a * k[i][c];
  return r;
}

void apply_boundary(TensorField& phi, const TensorField& start, double t, const FlowConfig& cfg) {
  const int n = phi.grid.n;
  switch (cfg.boundary) {
    case BoundaryPolicy::fixed:
      phi.values[0] = start.values[0];
      phi.values[n - 1] = start.values[n - 1];
      break;
    case BoundaryPolicy::exact:
      if (!cfg.exact) throw std::invalid_argument("exact boundary policy needs a solution callback");
      phi.values[0] = cfg.exact(t, phi.grid.node(0));
      phi.values[n - 1] = cfg.exact(t, phi.grid.node(n - 1));
      break;
    case BoundaryPolicy::free:
      break;
  }
}

}  // namespace

double closedness_residual(const TensorField& phi, const LinkSpec& link, int accuracy) {
  const StencilSet st = make_stencils(phi.grid, 1, accuracy);
  std::vector<double> r(phi.grid.n, 0.0);
  parallel_for(std::size_t(phi.grid.n), [&](std::size_t i) {
    const auto d = ext_deriv<1>(nodal_jets<1>(phi, st, int(i)), link);
    for (const auto& v : d) r[i] = std::max(r[i], std::abs(value(v)));
  });
  return *std::max_element(r.begin(), r.end());
}

TensorField torsion_from_phi(const TensorField& phi, const LinkSpec& link, const FlowConfig& cfg) {
  check_closed(phi, link, cfg);
  const StencilSet st = make_stencils(phi.grid, 2, cfg.accuracy);
  TensorField T(phi.model, phi.link, phi.grid, 2, Symmetry::none);
  parallel_for(std::size_t(phi.grid.n), [&](std::size_t i) {
    const auto G = node_geometry<2>(nodal_jets<2>(phi, st, int(i)), link);
    T.values[i] = values(truncate_dense<J<0>>(G.T));
  });
  return T;
}

TensorField laplacian_flow_rhs(const TensorField& phi, const LinkSpec& link, const FlowConfig& cfg) {
  check_closed(phi, link, cfg);
  const StencilSet st = make_stencils(phi.grid, 2, cfg.accuracy);
  TensorField out(phi.model, phi.link, phi.grid, 3, Symmetry::antisymmetric);
  out.values = rhs_values(phi, link, st);
  return out;
}

double stability_bound(const FlowState& s, const FlowConfig& cfg) {
  double gmax = 0.0;
  for (int i = 0; i < s.phi.grid.n; ++i) {
    const auto m = metric_from_phi_dense(s.phi.values[i]);
    gmax = std::max(gmax, m.ginv[0]);
  }
  const double h = s.phi.grid.min_spacing();
  return cfg.cfl * h * h / gmax;
}

FlowState step_flow(const FlowState& s, double dt, Direction dir, const FlowConfig& cfg) {
  if (!s.link) throw std::invalid_argument("flow state without a link");
  const double bound = stability_bound(s, cfg);
  if (!(dt > 0.0) || dt > bound * (1.0 + 1e-12))
    throw StabilityViolation("dt = " + std::to_string(dt) + " exceeds the stability bound " + std::to_string(bound));
  check_closed(s.phi, *s.link, cfg);
  const StencilSet st = make_stencils(s.phi.grid, 2, cfg.accuracy);
  const double sgn = dir == Direction::forward ? 1.0 : -1.0;
  const double h = sgn * dt;
  auto F = [&](const TensorField& p) { return rhs_values(p, *s.link, st); };
  const auto k1 = F(s.phi);
  TensorField y = axpy(s.phi, 0.5 * h, k1);
  apply_boundary(y, s.phi, s.t + 0.5 * h, cfg);
  const auto k2 = F(y);
  y = axpy(s.phi, 0.5 * h, k2);
  apply_boundary(y, s.phi, s.t + 0.5 * h, cfg);
  const auto k3 = F(y);
  y = axpy(s.phi, h, k3);
  apply_boundary(y, s.phi, s.t + h, cfg);
  const auto k4 = F(y);
  FlowState out = s;
  for (int i = 0; i < s.phi.grid.n; ++i)
    for (std::size_t c = 0; c < 343; ++c)
      out.phi.values[i][c] += h / 6.0 * (k1[i][c] + 2.0 * k2[i][c] + 2.0 * k3[i][c] + k4[i][c]);
  out.t = s.t + h;
  apply_boundary(out.phi, s.phi, out.t, cfg);
  // Abort rather than continue through a degeneration.
  for (int i = 0; i < s.phi.grid.n; ++i) {
    try {
      metric_from_phi_dense(out.phi.values[i]);
    } catch (const DegenerateForm& e) {
      throw DegenerateForm(std::string(e.what()) + " at node " + std::to_string(i) + ", t = " + std::to_string(out.t));
    }
  }
  return out;
}

std::vector<FlowState> integrate_flow(const FlowState& s0, double dt, int steps, Direction dir,
                                      const FlowConfig& cfg) {
  std::vector<FlowState> traj{s0};
  traj.reserve(steps + 1);
  for (int k = 0; k < steps; ++k) traj.push_back(step_flow(traj.back(), dt, dir, cfg));
  return traj;
}

EvolutionReport evolution_cross_check(const std::vector<FlowState>& traj, const FlowConfig& cfg) {
  if (traj.size() < 5) throw std::invalid_argument("evolution_cross_check needs at least 5 states");
  EvolutionReport rep;
  const LinkSpec& link = *traj[0].link;
  const int n = traj[0].phi.grid.n;
  const double dt = traj[1].t - traj[0].t;
  const StencilSet st = make_stencils(traj[0].phi.grid, 2, cfg.accuracy);
  // Forced end nodes do not follow the semi-discrete flow.
  const int lo = cfg.boundary == BoundaryPolicy::free ? 0 : 1;
  const int hi = cfg.boundary == BoundaryPolicy::free ? n : n - 1;
  std::vector<std::vector<Mat7<double>>> g(traj.size(), std::vector<Mat7<double>>(n));
  std::vector<std::vector<double>> vol(traj.size(), std::vector<double>(n));
  for (std::size_t k = 0; k < traj.size(); ++k)
    for (int i = 0; i < n; ++i) {
      const auto m = metric_from_phi_dense(traj[k].phi.values[i]);
      g[k][i] = m.g;
      vol[k][i] = m.vol;
    }
  for (std::size_t k = 2; k + 2 < traj.size(); ++k) {
    std::vector<double> r(n, 0.0);
    parallel_for(std::size_t(hi - lo), [&](std::size_t q) {
      const int i = lo + int(q);
      const auto G = node_geometry<2>(nodal_jets<2>(traj[k].phi, st, i), link);
      for (int a = 0; a < 49; ++a) {
        const double dg = (g[k - 2][i][a] - 8.0 * g[k - 1][i][a] + 8.0 * g[k + 1][i][a] - g[k + 2][i][a]) / (12.0 * dt);
        r[i] = std::max(r[i], std::abs(dg - 2.0 * value(G.h[a])));
      }
    });
    rep.metric_residual = std::max(rep.metric_residual, *std::max_element(r.begin(), r.end()));
    ++rep.checked_states;
  }
  rep.min_volume_increment = INFINITY;
  double max_change = 0.0;
  for (std::size_t k = 0; k + 1 < traj.size(); ++k)
    for (int i = lo; i < hi; ++i) {
      const double dv = (vol[k + 1][i] - vol[k][i]) * (dt > 0 ? 1.0 : -1.0);
      rep.min_volume_increment = std::min(rep.min_volume_increment, dv);
      max_change = std::max(max_change, std::abs(dv));
    }
  rep.volume_increasing = rep.min_volume_increment > 0.0;
  rep.volume_constant = max_change <= 1e-12;
  const double d0 = closedness_residual(traj[0].phi, link, cfg.accuracy);
  for (const auto& s : traj)
    rep.closedness_drift = std::max(rep.closedness_drift, closedness_residual(s.phi, link, cfg.accuracy) - d0);
  return rep;
}

std::vector<std::string> save_trajectory(const std::vector<FlowState>& traj, const std::string& dir,
                                         const std::string& prefix) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  std::ofstream idx(dir + "/" + prefix + "_index.txt");
  if (!idx) throw std::runtime_error("cannot write trajectory index in " + dir);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_%04zu.field", prefix.c_str(), k);
    save_snapshot(dir + "/" + name, traj[k].phi);
    char t[64];
    std::snprintf(t, sizeof t, "%a", traj[k].t);
    idx << k << ' ' << t << ' ' << name << "\n";
    files.push_back(dir + "/" + name);
  }
  return files;
}

Dense<double> fowdar_forward_exact(double t, double x) {
  const double c2 = 1.0 - t / 3.0;
  const double sigma = -7.5 * std::log(c2);
  const auto p = model_at<0>(fowdar_model(), x + sigma).phi;
  Dense<double> v(343);
  const double c3 = c2 * std::sqrt(c2);
  for (int a = 0; a < 343; ++a) v[a] = c3 * value(p[a]);
  return v;
}

}  // namespace g2lab
