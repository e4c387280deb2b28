#include "g2lab/shrinker.hpp"

#include <algorithm>
#include <cmath>

#include "g2lab/parallel.hpp"

namespace g2lab {

namespace {

template <int N>
ModelJets<N> fields_at(const ShrinkerData& s, const ShrinkerEval& ev, const StencilSet* st, int i) {
  if (ev.mode == EvalMode::analytic) return model_at<N>(s.model, s.phi.grid.node(i));
  ModelJets<N> mj;
  mj.phi = nodal_jets<N>(s.phi, *st, i);
  mj.f = nodal_jets<N>(s.f, *st, i)[0];
  return mj;
}

double sup(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

template <class S>
Mat7<double> vals(const Mat7<S>& a) {
  Mat7<double> r;
  for (int i = 0; i < 49; ++i) r[i] = value(a[i]);
  return r;
}

// Slope of the model potential along x, at a jet argument.
template <int N>
J<N> potential_slope(const ModelSpec& m, const J<N>& y) {
  if (m.kind == ModelKind::fowdar) return J<N>(2.5);
  return y * (2.0 * m.f_coef);
}

template <int N>
J<N> radial_gradient(const ModelSpec& m, const J<N>& y) {
  const auto met = metric_from_phi_dense(model_at<N>(m, y).phi);
  return met.ginv[0] * potential_slope(m, y);
}

// Three-point derivative at the middle of (t0, t1, t2).
double d3(double t0, double t1, double t2, double v0, double v1, double v2) {
  const double h1 = t1 - t0, h2 = t2 - t1;
  return -h2 / (h1 * (h1 + h2)) * v0 + (h2 - h1) / (h1 * h2) * v1 + h1 / (h2 * (h1 + h2)) * v2;
}

}  // namespace

double dilation_factor(double lambda) {
  if (!(lambda < 0.0)) throw std::invalid_argument("dilation constant must be negative");
  return std::pow(2.0 * std::abs(lambda) / 3.0, 1.5);
}

ShrinkerData normalize_dilation(const ShrinkerData& s) {
  const double c = dilation_factor(s.lambda);
  ShrinkerData out = s;
  out.lambda = -1.5;
  if (c == 1.0) return out;
  out.model.phi_scale *= c;
  for (auto& v : out.phi.values)
    for (double& x : v) x *= c;
  return out;
}

std::optional<double> cone_radius(const ModelSpec& m, double x) {
  if (m.kind == ModelKind::fowdar) return std::nullopt;
  return std::cbrt(m.phi_scale) * x;
}

double SolitonResiduals::max() const { return std::max({phi_sup, metric_sup, trace_sup}); }

SolitonResiduals soliton_residuals(const ShrinkerData& s, const ShrinkerEval& ev) {
  const RadialGrid& grid = s.phi.grid;
  const int n = grid.n;
  StencilSet st;
  if (ev.mode == EvalMode::nodal) st = make_stencils(grid, 2, ev.accuracy);
  SolitonResiduals r;
  r.x = grid.nodes();
  r.phi_eq.assign(n, 0.0);
  r.metric_eq.assign(n, 0.0);
  r.trace_eq.assign(n, 0.0);
  r.laplacian_f.assign(n, 0.0);
  r.gradient_gap.assign(n, 0.0);
  const LinkSpec& link = s.model.link();
  const double lam = s.lambda;
  parallel_for(std::size_t(n), [&](std::size_t q) {
    const int i = int(q);
    const auto F = fields_at<2>(s, ev, &st, i);
    const auto G = node_geometry<2>(F.phi, link);
    const auto gi0 = truncate_mat<J<0>>(G.met.ginv);
    const auto g0 = truncate_mat<J<0>>(G.met.g);
    // X^m = g^{m0} f'
    const J<1> df = derivative(F.f);
    std::array<J<1>, 7> X;
    for (int m = 0; m < 7; ++m) X[m] = truncate<1>(G.met.ginv[idx2(m, 0)]) * df;
    const Dense<J<1>> ixphi = interior(X, truncate_dense<J<1>>(F.phi));
    const auto Lx = ext_deriv<1>(ixphi, link);
    const auto p0 = values(truncate_dense<J<0>>(F.phi));
    const auto lap = i_phi_dense(p0, vals(G.h), vals(gi0));
    Dense<double> res(343);
    for (int a = 0; a < 343; ++a) res[a] = lap[a] - lam * p0[a] - value(Lx[a]);
    r.phi_eq[i] = std::sqrt(std::max(0.0, form_norm2(res, vals(gi0))));
    const auto H = hessian<2>(F.f, G.sg1, G.sg2);
    Dense<double> m2(49);
    for (int a = 0; a < 49; ++a) m2[a] = value(G.h[a]) - lam / 3.0 * value(g0[a]) - value(H[a]);
    r.metric_eq[i] = std::sqrt(std::max(0.0, norm2_value(m2, vals(gi0))));
    const double lf = value(trace(H, gi0));
    r.laplacian_f[i] = lf;
    r.trace_eq[i] = std::abs(lf + 2.0 / 3.0 * value(G.R) + 7.0 * lam / 3.0);
    // The gradient from the model slope of f against g^-1 df from the jets.
    if (ev.mode == EvalMode::analytic) {
      const double slope = value(potential_slope<0>(s.model, J<0>(grid.node(i))));
      double gap = 0.0;
      for (int m = 0; m < 7; ++m) gap = std::max(gap, std::abs(value(gi0[idx2(m, 0)]) * (value(df) - slope)));
      r.gradient_gap[i] = gap;
    }
  });
  r.phi_sup = sup(r.phi_eq);
  r.metric_sup = sup(r.metric_eq);
  r.trace_sup = sup(r.trace_eq);
  return r;
}

ShrinkerData perturb_potential(const ShrinkerData& s, double eps) {
  ShrinkerData out = s;
  const RadialGrid& g = s.f.grid;
  const double span = g.t_max - g.t_min, xc = g.t_min + 0.5 * span, w = 0.25 * span;
  for (int i = 0; i < g.n; ++i) {
    const double u = (g.node(i) - xc) / w;
    out.f.values[i][0] += eps * std::exp(-u * u);
  }
  return out;
}

double linear_response_slope(const ShrinkerData& s, const std::vector<double>& eps, const ShrinkerEval& ev) {
  ShrinkerEval e = ev;
  e.mode = EvalMode::nodal;
  std::vector<double> lx, ly;
  for (double a : eps) {
    lx.push_back(std::log(a));
    ly.push_back(std::log(soliton_residuals(perturb_potential(s, a), e).max()));
  }
  return fit_slope(lx, ly);
}

EReport E_identities(const ShrinkerData& s, const ShrinkerEval& ev) {
  if (std::abs(s.lambda + 1.5) > 1e-12) throw std::invalid_argument("E identities need lambda = -3/2");
  const RadialGrid& grid = s.phi.grid;
  const int n = grid.n;
  StencilSet st;
  if (ev.mode == EvalMode::nodal) st = make_stencils(grid, 3, ev.accuracy);
  EReport r;
  r.x = grid.nodes();
  r.E.assign(n, 0.0);
  r.grad_E_eq.assign(n, 0.0);
  r.grad_f_T.assign(n, 0.0);
  const LinkSpec& link = s.model.link();
  parallel_for(std::size_t(n), [&](std::size_t q) {
    const int i = int(q);
    const auto F = fields_at<3>(s, ev, &st, i);
    const auto G = node_geometry<3>(F.phi, link);
    const auto gi1 = truncate_mat<J<1>>(G.met.ginv);
    const J<2> df = derivative(F.f);
    const J<1> df1 = truncate<1>(df);
    // E = R + g^00 (f')^2 - f
    const J<1> E = G.R + gi1[0] * df1 * df1 - truncate<1>(F.f);
    r.E[i] = value(E);
    const double dE = value(derivative(E));
    // P_ij = T_i^k T_kj and its divergence g^{dj} nabla_d P_ij.
    const auto gi2 = truncate_mat<J<2>>(G.met.ginv);
    const Dense<J<2>> Tup = raise_slot(G.T, 2, 1, gi2);
    Dense<J<2>> P(49, J<2>(0.0));
    for (int a = 0; a < 7; ++a)
      for (int b = 0; b < 7; ++b) {
        J<2> v(0.0);
        for (int k = 0; k < 7; ++k) v += Tup[idx2(a, k)] * G.T[idx2(k, b)];
        P[idx2(a, b)] = v;
      }
    const auto dP = cov_deriv<2>(P, G.sg2);
    const auto gi0 = truncate_mat<J<0>>(G.met.ginv);
    double t2 = value(torsion_norm2(truncate_dense<J<0>>(G.T), gi0));
    std::array<double, 7> res{};
    for (int a = 0; a < 7; ++a) {
      double div = 0.0;
      for (int d = 0; d < 7; ++d)
        for (int b = 0; b < 7; ++b) div += value(gi0[idx2(d, b)]) * value(dP[idx3(d, a, b)]);
      const double dfa = a == 0 ? value(df) : 0.0;
      res[a] = (a == 0 ? dE : 0.0) + 2.0 / 3.0 * t2 * dfa - 4.0 * div;
    }
    // |res|_g with the inverse metric.
    double nr = 0.0;
    for (int a = 0; a < 7; ++a)
      for (int b = 0; b < 7; ++b) nr += value(gi0[idx2(a, b)]) * res[a] * res[b];
    r.grad_E_eq[i] = std::sqrt(std::max(0.0, nr));
    // (grad f)^m T_mj
    std::array<double, 7> v{};
    for (int j = 0; j < 7; ++j)
      for (int m = 0; m < 7; ++m) v[j] += value(gi0[idx2(m, 0)]) * value(df) * value(G.T[idx2(m, j)]);
    double nv = 0.0;
    for (int a = 0; a < 7; ++a)
      for (int b = 0; b < 7; ++b) nv += value(gi0[idx2(a, b)]) * v[a] * v[b];
    r.grad_f_T[i] = std::sqrt(std::max(0.0, nv));
  });
  r.grad_E_sup = sup(r.grad_E_eq);
  r.grad_f_T_sup = sup(r.grad_f_T);
  if (cone_radius(s.model, 1.0)) {
    double m = 0.0;
    for (int i = n / 2; i < n; ++i) {
      const double rr = *cone_radius(s.model, r.x[i]);
      if (rr > M_E) m = std::max(m, std::abs(r.E[i]) / std::log(rr));
    }
    r.log_ratio = m;
  }
  return r;
}

BackwardFlow self_similar_flow(const ShrinkerData& s, const std::vector<double>& taus, double ds_max) {
  if (std::abs(s.lambda + 1.5) > 1e-12) throw std::invalid_argument("backward flow needs lambda = -3/2");
  for (double t : taus)
    if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("tau must lie in (0, 1]");
  const ModelSpec& m = s.model;
  const RadialGrid& grid = s.phi.grid;
  const int n = grid.n;
  for (int i = 0; i < n; ++i) {
    const double x0 = value(radial_gradient<0>(m, J<0>(grid.node(i))));
    if (!(x0 > 0.0))
      throw CriticalPoint("grad f is not radially outward at node " + std::to_string(i) + " (x = " +
                          std::to_string(grid.node(i)) + ")");
  }
  // Integrate in increasing s; taus are visited in that order and stored as requested.
  std::vector<std::size_t> order(taus.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return taus[a] > taus[b]; });
  BackwardFlow flow;
  flow.model = m;
  flow.grid = grid;
  flow.states.resize(taus.size());
  std::vector<std::vector<J<3>>> psi(taus.size(), std::vector<J<3>>(n));
  parallel_for(std::size_t(n), [&](std::size_t q) {
    J<3> y = J<3>::variable(grid.node(int(q)));
    double s_now = 0.0;
    auto F = [&](const J<3>& p) {
      const J<3> v = radial_gradient<3>(m, p);
      if (!(value(v) > 0.0)) throw CriticalPoint("grad f vanishes along the flow from node " + std::to_string(q));
      return v;
    };
    for (std::size_t k : order) {
      const double s_to = -std::log(taus[k]);
      const int steps = int(std::ceil((s_to - s_now) / ds_max - 1e-12));
      if (steps > 0) {
        const double h = (s_to - s_now) / steps;
        for (int j = 0; j < steps; ++j) {
          const J<3> k1 = F(y);
          const J<3> k2 = F(y + k1 * (0.5 * h));
          const J<3> k3 = F(y + k2 * (0.5 * h));
          const J<3> k4 = F(y + k3 * h);
          y += (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (h / 6.0);
        }
      }
      s_now = s_to;
      psi[k][q] = y;
    }
  });
  for (std::size_t k = 0; k < taus.size(); ++k) {
    BackwardFlowState& st = flow.states[k];
    st.tau = taus[k];
    st.psi = psi[k];
    st.phi = TensorField(s.phi.model, s.phi.link, grid, 3, Symmetry::antisymmetric);
    st.f = TensorField(s.phi.model, s.phi.link, grid, 0, Symmetry::none);
    st.h = TensorField(s.phi.model, s.phi.link, grid, 0, Symmetry::none);
    for (int i = 0; i < n; ++i) {
      if (i > 0 && !(value(st.psi[i]) > value(st.psi[i - 1])))
        throw std::runtime_error("reparametrization lost monotonicity at node " + std::to_string(i));
      const auto mj = backward_jets<0>(m, st.tau, st.psi[i]);
      st.phi.values[i] = values(mj.phi);
      st.f.values[i][0] = value(mj.f);
      st.h.values[i][0] = 2.0 * std::sqrt(st.tau * value(mj.f));
    }
  }
  return flow;
}

EnvelopeReport radial_envelope(const BackwardFlow& flow) {
  if (!cone_radius(flow.model, 1.0)) throw std::invalid_argument("radial envelope needs a cone-type model");
  EnvelopeReport rep;
  rep.min_margin = INFINITY;
  for (const auto& st : flow.states) {
    const double e = std::exp(-0.5 * std::log(st.tau));
    for (int i = 0; i < flow.grid.n; ++i) {
      const double r = *cone_radius(flow.model, flow.grid.node(i));
      const double rs = *cone_radius(flow.model, value(st.psi[i]));
      const double margin = std::min(rs - ((r - 1.0) * e + 1.0), ((r + 1.0) * e - 1.0) - rs);
      rep.min_margin = std::min(rep.min_margin, margin);
      if (margin < -1e-12) ++rep.violations;
    }
  }
  return rep;
}

FlowIdentityResiduals backward_flow_residuals(const BackwardFlow& flow) {
  FlowIdentityResiduals rep;
  const int n = flow.grid.n;
  const LinkSpec& link = flow.model.link();
  for (std::size_t k = 1; k + 1 < flow.states.size(); ++k) {
    const auto &A = flow.states[k - 1], &B = flow.states[k], &C = flow.states[k + 1];
    std::vector<std::array<double, 3>> r(n);
    parallel_for(std::size_t(n), [&](std::size_t q) {
      const int i = int(q);
      const auto mj = backward_jets<2>(flow.model, B.tau, B.psi[i]);
      const auto G = node_geometry<2>(mj.phi, link);
      const auto gi0 = vals(truncate_mat<J<0>>(G.met.ginv));
      const auto g0 = vals(truncate_mat<J<0>>(G.met.g));
      const auto p0 = values(truncate_dense<J<0>>(G.phi));
      const auto lap = i_phi_dense(p0, vals(G.h), gi0);
      Dense<double> res(343);
      for (int a = 0; a < 343; ++a)
        res[a] = d3(A.tau, B.tau, C.tau, A.phi.values[i][a], B.phi.values[i][a], C.phi.values[i][a]) + lap[a];
      r[i][0] = std::sqrt(std::max(0.0, form_norm2(res, gi0)));
      const double df = value(derivative(mj.f));
      const double dtf = d3(A.tau, B.tau, C.tau, A.f.values[i][0], B.f.values[i][0], C.f.values[i][0]);
      r[i][1] = std::abs(dtf + gi0[0] * df * df);
      const auto H = hessian<2>(mj.f, G.sg1, G.sg2);
      Dense<double> hr(49);
      for (int a = 0; a < 49; ++a) hr[a] = value(H[a]) - g0[a] / (2.0 * B.tau) - value(G.h[a]);
      r[i][2] = std::sqrt(std::max(0.0, norm2_value(hr, gi0)));
    });
    for (const auto& v : r) {
      rep.heat_eq = std::max(rep.heat_eq, v[0]);
      rep.f_evolution = std::max(rep.f_evolution, v[1]);
      rep.hessian = std::max(rep.hessian, v[2]);
    }
    ++rep.checked_states;
  }
  return rep;
}

HReport h_identities(const BackwardFlow& flow) {
  HReport rep;
  const int n = flow.grid.n;
  const LinkSpec& link = flow.model.link();
  const bool has_r = cone_radius(flow.model, 1.0).has_value();
  rep.min_h_over_r = INFINITY;
  rep.max_h_over_r = 0.0;
  for (std::size_t k = 0; k < flow.states.size(); ++k) {
    const auto& B = flow.states[k];
    for (int i = 0; i < n; ++i)
      if (!(B.f.values[i][0] > 0.0)) throw std::invalid_argument("h needs f > 0 at node " + std::to_string(i));
    if (has_r)
      for (int i = 0; i < n; ++i) {
        const double r = *cone_radius(flow.model, flow.grid.node(i)), h = B.h.values[i][0];
        rep.min_h_over_r = std::min(rep.min_h_over_r, h / r);
        rep.max_h_over_r = std::max(rep.max_h_over_r, h / r);
        if (r > M_E) {
          const double c = std::abs(h - r) * r / (B.tau * B.tau * std::log(r));
          rep.comparability = std::max(rep.comparability.value_or(0.0), c);
        }
      }
    if (k == 0 || k + 1 == flow.states.size()) continue;
    const auto &A = flow.states[k - 1], &C = flow.states[k + 1];
    std::vector<std::array<double, 3>> r(n);
    parallel_for(std::size_t(n), [&](std::size_t q) {
      const int i = int(q);
      const auto mj = backward_jets<2>(flow.model, B.tau, B.psi[i]);
      const auto G = node_geometry<2>(mj.phi, link);
      const auto gi0 = truncate_mat<J<0>>(G.met.ginv);
      const J<2> h = sqrt(mj.f * B.tau) * 2.0;
      const double hv = value(h), dh = value(derivative(h)), df = value(derivative(mj.f));
      const double g00 = value(gi0[0]);
      const double R = value(G.R);
      const double grad_h2 = g00 * dh * dh;
      const double E = R + g00 * df * df - value(mj.f) / B.tau;
      r[i][0] = std::abs(grad_h2 - 1.0 - 4.0 * B.tau * B.tau / (hv * hv) * (E - R));
      const auto H = hessian<2>(h, G.sg1, G.sg2);
      const double lap = value(trace(H, gi0));
      r[i][1] = std::abs(hv * lap - 7.0 + 4.0 / 3.0 * B.tau * R + grad_h2);
      const double dth = d3(A.tau, B.tau, C.tau, A.h.values[i][0], B.h.values[i][0], C.h.values[i][0]);
      r[i][2] = std::abs(dth - 2.0 * B.tau / hv * (R - E));
    });
    for (const auto& v : r) {
      rep.grad_h = std::max(rep.grad_h, v[0]);
      rep.lap_h = std::max(rep.lap_h, v[1]);
      rep.dtau_h = std::max(rep.dtau_h, v[2]);
    }
    ++rep.checked_states;
  }
  if (has_r) {
    rep.comparable = rep.min_h_over_r >= 0.5 && rep.max_h_over_r <= 2.0;
    if (!rep.comparability) rep.comparability = 0.0;
  }
  return rep;
}

double cauchy_constant(const BackwardFlow& flow, double r_lo, double r_hi) {
  double c = 0.0;
  for (std::size_t k = 1; k < flow.states.size(); ++k) {
    const auto &A = flow.states[k - 1], &B = flow.states[k];
    const double dt = std::abs(A.tau - B.tau);
    for (int i = 0; i < flow.grid.n; ++i) {
      const auto r = cone_radius(flow.model, flow.grid.node(i));
      const double rr = r ? *r : flow.grid.node(i);
      if (rr < r_lo || rr > r_hi) continue;
      Dense<double> d(343);
      for (int a = 0; a < 343; ++a) d[a] = A.phi.values[i][a] - B.phi.values[i][a];
      const auto met = metric_from_phi_dense(B.phi.values[i]);
      c = std::max(c, std::sqrt(std::max(0.0, form_norm2(d, met.ginv))) / dt);
    }
  }
  return c;
}

DecayProfile conical_decay_profile(const ModelSpec& m, const ModelSpec& cone, const std::vector<double>& bs,
                                   double r_max) {
  if (bs.empty()) throw std::invalid_argument("decay profile needs at least one radius");
  const double b0 = *std::min_element(bs.begin(), bs.end());
  std::vector<double> xs;
  for (double r = b0; r <= r_max * (1.0 + 1e-12); r *= 1.04) xs.push_back(r);
  std::vector<std::array<double, 4>> nv(xs.size());
  const LinkSpec& link = cone.link();
  parallel_for(xs.size(), [&](std::size_t q) {
    const auto pj = model_at<3>(m, xs[q]).phi, cj = model_at<3>(cone, xs[q]).phi;
    const auto C = node_geometry<3>(cj, link);
    Dense<J<3>> d(343);
    for (int a = 0; a < 343; ++a) d[a] = pj[a] - cj[a];
    const auto d1 = cov_deriv<3>(d, C.sg1);
    const auto d2 = cov_deriv<2>(d1, sparse_gamma<J<1>>(C.gamma));
    const auto d3v = cov_deriv<1>(d2, sparse_gamma<J<0>>(C.gamma));
    const auto gi = truncate_mat<J<0>>(C.met.ginv);
    nv[q][0] = std::sqrt(norm2_value(truncate_dense<J<0>>(d), gi));
    nv[q][1] = std::sqrt(norm2_value(truncate_dense<J<0>>(d1), gi));
    nv[q][2] = std::sqrt(norm2_value(truncate_dense<J<0>>(d2), gi));
    nv[q][3] = std::sqrt(norm2_value(d3v, gi));
  });
  DecayProfile p;
  p.b = bs;
  std::array<std::vector<double>, 4> ly;
  std::vector<double> lx;
  bool positive = true;
  for (double b : bs) {
    std::array<double, 4> s{}, sc{};
    for (std::size_t q = 0; q < xs.size(); ++q)
      if (xs[q] >= b * (1.0 - 1e-12))
        for (int l = 0; l < 4; ++l) s[l] = std::max(s[l], nv[q][l]);
    for (int l = 0; l < 4; ++l) {
      sc[l] = std::pow(b, l) * s[l];
      if (!(s[l] > 0.0)) positive = false;
      ly[l].push_back(std::log(s[l]));
    }
    lx.push_back(std::log(b));
    p.scaled.push_back(sc);
  }
  if (positive && bs.size() >= 2)
    for (int l = 0; l < 4; ++l) p.exponent[l] = fit_slope(lx, ly[l]);
  return p;
}

double dilation_identity_gap(const ModelSpec& m, const ModelSpec& cone, double lambda, const std::vector<double>& bs,
                             double r_max) {
  auto diff_norm = [&](const Dense<J<0>>& p, double x) {
    const auto c = model_at<0>(cone, x).phi;
    const auto met = metric_from_phi_dense(values(c));
    Dense<double> d(343);
    for (int a = 0; a < 343; ++a) d[a] = value(p[a]) - value(c[a]);
    return std::sqrt(std::max(0.0, form_norm2(d, met.ginv)));
  };
  double gap = 0.0;
  for (double b : bs) {
    double lhs = 0.0, rhs = 0.0;
    for (double x = b; x * lambda <= r_max * (1.0 + 1e-12); x *= 1.04) {
      // lambda^-3 rho_lambda^* phi: the model at lambda x, radial components times lambda.
      auto p = model_at<0>(m, J<0>(lambda * x)).phi;
      for (int a = 0; a < 343; ++a) {
        const bool radial = a / 49 == 0 || (a / 7) % 7 == 0 || a % 7 == 0;
        p[a] = p[a] * ((radial ? lambda : 1.0) / (lambda * lambda * lambda));
      }
      lhs = std::max(lhs, diff_norm(p, x));
      rhs = std::max(rhs, diff_norm(model_at<0>(m, J<0>(lambda * x)).phi, lambda * x));
    }
    gap = std::max(gap, std::abs(lhs - rhs));
  }
  return gap;
}

}  // namespace g2lab
