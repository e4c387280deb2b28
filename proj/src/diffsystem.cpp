#include "g2lab/diffsystem.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Dense>

#include "g2lab/parallel.hpp"

namespace g2lab {

namespace {

constexpr int kRank[kBlocks] = {3, 2, 3, 4, 2, 3, 4, 5, 4};
constexpr bool kInY[kBlocks] = {true, true, true, true, true, false, false, false, false};

template <int N>
struct Side {
  NodeGeometry<N> G;
  Dense<J<N - 2>> Rm_up;   // R^l_ijk, last slot raised
  Dense<J<N - 3>> dRm_up;
  Dense<J<N - 2>> dT;
  Dense<J<N - 3>> ddT;
};

template <int N>
Side<N> side(const Dense<J<N>>& phi, const LinkSpec& link) {
  Side<N> s;
  s.G = node_geometry<N>(phi, link);
  const auto sg3 = sparse_gamma<J<N - 3>>(s.G.gamma);
  s.dT = cov_deriv<N - 1>(s.G.T, s.G.sg2);
  s.ddT = cov_deriv<N - 2>(s.dT, sg3);
  s.Rm_up = raise_slot(s.G.Rm, 4, 3, truncate_mat<J<N - 2>>(s.G.met.ginv));
  s.dRm_up = raise_slot(cov_deriv<N - 2>(s.G.Rm, sg3), 5, 4, truncate_mat<J<N - 3>>(s.G.met.ginv));
  return s;
}

template <class S>
Dense<S> minus(const Dense<S>& a, const Dense<S>& b) {
  Dense<S> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

template <class S>
Dense<double> mat_values(const Mat7<S>& m) {
  Dense<double> r(49);
  for (int i = 0; i < 49; ++i) r[i] = value(m[i]);
  return r;
}

Mat7<double> to_mat(const Dense<double>& d) {
  Mat7<double> m;
  for (int i = 0; i < 49; ++i) m[i] = d[i];
  return m;
}

struct NodeOut {
  std::array<Dense<double>, kBlocks> blocks;
  Dense<double> metric;
  std::array<double, 4> grad{};
  std::array<Dense<double>, 4> lap;
};

// Gradient norm and (when the jets allow it) rough Laplacian of one X block.
template <int M, int N>
void x_block(const Dense<J<M>>& K, const NodeGeometry<N>& G, const Mat7<double>& gi, double& grad, Dense<double>* lap) {
  grad = std::sqrt(norm2(values(cov_deriv<M>(K, sparse_gamma<J<M - 1>>(G.gamma))), gi));
  if constexpr (M >= 2) {
    if (lap)
      *lap = values(rough_laplacian<M>(K, sparse_gamma<J<M - 1>>(G.gamma), sparse_gamma<J<M - 2>>(G.gamma),
                                       truncate_mat<J<M - 1>>(G.met.ginv)));
  }
}

template <int N>
NodeOut node_differences(const Dense<J<N>>& pa, const Dense<J<N>>& pb, const LinkSpec& link, bool laps) {
  const Side<N> a = side<N>(pa, link), b = side<N>(pb, link);
  const auto& G = a.G;
  NodeOut o;
  const Mat7<double> gi = truncate_mat<double>(G.met.ginv);
  o.metric = mat_values(G.met.g);
  o.blocks[kGamma] = values(minus(pa, pb));
  o.blocks[kMu] = minus(mat_values(G.met.g), mat_values(b.G.met.g));
  const Dense<J<N - 1>> A = raise_slot(minus(G.gamma, b.G.gamma), 3, 2, truncate_mat<J<N - 1>>(G.met.g));
  o.blocks[kA] = values(A);
  o.blocks[kB] = values(cov_deriv<N - 1>(A, G.sg2));
  o.blocks[kF] = values(minus(G.T, b.G.T));
  const Dense<J<N - 2>> V = minus(a.dT, b.dT);
  const Dense<J<N - 2>> S = raise_slot(minus(a.Rm_up, b.Rm_up), 4, 3, truncate_mat<J<N - 2>>(G.met.g));
  const Dense<J<N - 3>> Q = raise_slot(minus(a.dRm_up, b.dRm_up), 5, 4, truncate_mat<J<N - 3>>(G.met.g));
  const Dense<J<N - 3>> W = minus(a.ddT, b.ddT);
  o.blocks[kV] = values(V);
  o.blocks[kS] = values(S);
  o.blocks[kQ] = values(Q);
  o.blocks[kW] = values(W);
  x_block<N - 2>(V, G, gi, o.grad[0], laps ? &o.lap[0] : nullptr);
  x_block<N - 2>(S, G, gi, o.grad[1], laps ? &o.lap[1] : nullptr);
  x_block<N - 3>(Q, G, gi, o.grad[2], laps ? &o.lap[2] : nullptr);
  x_block<N - 3>(W, G, gi, o.grad[3], laps ? &o.lap[3] : nullptr);
  return o;
}

DiffBundle assemble(const std::string& model, const std::string& link, const RadialGrid& grid, double tau,
                    const DiffOptions& opt, const std::function<NodeOut(int)>& node) {
  std::vector<NodeOut> outs(grid.n);
  parallel_for(std::size_t(grid.n), [&](std::size_t i) { outs[i] = node(int(i)); });
  DiffBundle d;
  d.tau = tau;
  d.grid = grid;
  for (int b = 0; b < kBlocks; ++b) d.blocks[b] = TensorField(model, link, grid, kRank[b], Symmetry::none);
  d.metric = TensorField(model, link, grid, 2, Symmetry::symmetric);
  if (opt.laplacians) {
    d.laplacians.emplace();
    for (int q = 0; q < 4; ++q) (*d.laplacians)[q] = TensorField(model, link, grid, kRank[kV + q], Symmetry::none);
  }
  d.grad_norms.resize(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    d.r.push_back(opt.radius_scale * grid.node(i));
    for (int b = 0; b < kBlocks; ++b) d.blocks[b].values[i] = std::move(outs[i].blocks[b]);
    d.metric.values[i] = std::move(outs[i].metric);
    d.grad_norms[i] = outs[i].grad;
    if (opt.laplacians)
      for (int q = 0; q < 4; ++q) (*d.laplacians)[q].values[i] = std::move(outs[i].lap[q]);
  }
  return d;
}

bool same_grid(const RadialGrid& a, const RadialGrid& b) {
  return a.n == b.n && a.spacing == b.spacing && a.t_min == b.t_min && a.t_max == b.t_max;
}

double block_norm(const Dense<double>& t, const Mat7<double>& gi) { return std::sqrt(std::max(0.0, norm2(t, gi))); }

Mat7<double> inverse_metric(const DiffBundle& d, int node) {
  const Mat7<double> g = to_mat(d.metric.values[node]);
  Eigen::Matrix<double, 7, 7> m;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) m(i, j) = g[idx2(i, j)];
  const Eigen::Matrix<double, 7, 7> inv = m.inverse();
  Mat7<double> r;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) r[idx2(i, j)] = inv(i, j);
  return r;
}

template <class S>
double fit_slope(const std::vector<double>& x, const std::vector<S>& y) {
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

}  // namespace

const char* block_name(int b) {
  static const char* names[kBlocks] = {"gamma", "mu", "A", "B", "F", "V", "S", "Q", "W"};
  return names[b];
}

std::array<double, kBlocks> DiffBundle::norms(int node) const {
  const Mat7<double> gi = inverse_metric(*this, node);
  std::array<double, kBlocks> n{};
  for (int b = 0; b < kBlocks; ++b) n[b] = block_norm(blocks[b].values[node], gi);
  return n;
}

SectionNorms section_norms(const DiffBundle& d, int node) {
  const auto n = d.norms(node);
  SectionNorms s;
  for (int b = 0; b < kBlocks; ++b) (kInY[b] ? s.Y : s.X) += n[b] * n[b];
  for (double g : d.grad_norms[node]) s.grad_X += g * g;
  s.X = std::sqrt(s.X);
  s.Y = std::sqrt(s.Y);
  s.grad_X = std::sqrt(s.grad_X);
  return s;
}

DiffBundle build_differences(const FlowState& a, const FlowState& b, const DiffOptions& opt) {
  if (!a.link || !b.link) throw std::invalid_argument("flow state without a link");
  if (!same_grid(a.phi.grid, b.phi.grid)) throw ChartMismatch("flows live on different grids");
  if (a.link->name != b.link->name || a.phi.link != b.phi.link) throw ChartMismatch("flows live on different links");
  if (std::abs(a.t - b.t) > 1e-12 * std::max(1.0, std::abs(a.t))) throw ChartMismatch("flows sampled at different times");
  const RadialGrid& grid = a.phi.grid;
  const LinkSpec& link = *a.link;
  const std::string name = a.phi.model + "-" + b.phi.model;
  if (opt.laplacians) {
    const StencilSet st = make_stencils(grid, 5, opt.accuracy);
    return assemble(name, link.name, grid, opt.tau_sign * a.t, opt, [&](int i) {
      return node_differences<5>(nodal_jets<5>(a.phi, st, i), nodal_jets<5>(b.phi, st, i), link, true);
    });
  }
  const StencilSet st = make_stencils(grid, 4, opt.accuracy);
  return assemble(name, link.name, grid, opt.tau_sign * a.t, opt, [&](int i) {
    return node_differences<4>(nodal_jets<4>(a.phi, st, i), nodal_jets<4>(b.phi, st, i), link, false);
  });
}

DiffBundle build_differences(const ModelSpec& a, const ModelSpec& b, const RadialGrid& grid, const DiffOptions& opt) {
  if (a.link().name != b.link().name) throw ChartMismatch("models live on different links");
  const LinkSpec& link = a.link();
  const std::string name = a.name() + "-" + b.name();
  if (opt.laplacians)
    return assemble(name, link.name, grid, 0.0, opt, [&](int i) {
      const double x = grid.node(i);
      return node_differences<5>(model_at<5>(a, x).phi, model_at<5>(b, x).phi, link, true);
    });
  return assemble(name, link.name, grid, 0.0, opt, [&](int i) {
    const double x = grid.node(i);
    return node_differences<4>(model_at<4>(a, x).phi, model_at<4>(b, x).phi, link, false);
  });
}

std::vector<DiffBundle> difference_sequence(const std::vector<FlowState>& a, const std::vector<FlowState>& b,
                                            const DiffOptions& opt) {
  if (a.size() != b.size()) throw ChartMismatch("flows have different numbers of slices");
  std::vector<DiffBundle> seq;
  const std::size_t K = a.size();
  for (std::size_t k = 0; k < K; ++k) {
    DiffOptions o = opt;
    o.laplacians = k >= 2 && k + 2 < K;
    seq.push_back(build_differences(a[k], b[k], o));
  }
  return seq;
}

FittedConstants system_residual_constants(const std::vector<DiffBundle>& seq, const FitOptions& fit) {
  if (seq.size() < 5) throw std::invalid_argument("system_residual_constants needs at least 5 slices");
  const RadialGrid& grid = seq[0].grid;
  for (const auto& d : seq)
    if (!same_grid(d.grid, grid)) throw ChartMismatch("slices live on different grids");
  const double dt = seq[1].tau - seq[0].tau;
  for (std::size_t k = 1; k < seq.size(); ++k)
    if (std::abs(seq[k].tau - seq[k - 1].tau - dt) > 1e-9 * std::abs(dt))
      throw std::invalid_argument("slices are not equally spaced in tau");
  FittedConstants fc;
  constexpr double tiny = 1e-12;
  for (std::size_t k = 2; k + 2 < seq.size(); ++k) {
    const DiffBundle& d = seq[k];
    if (!d.laplacians) throw std::invalid_argument("checked slice built without laplacians");
    struct Req {
      double cy = 0.0, cx = 0.0;
      bool used_y = false, used_x = false;
    };
    std::vector<Req> req(grid.n);
    parallel_for(std::size_t(grid.n), [&](std::size_t q) {
      const int i = int(q);
      if (i < fit.margin || i >= grid.n - fit.margin || d.r[i] < fit.r_min) return;
      const Mat7<double> gi = inverse_metric(d, i);
      double dY2 = 0.0, dX2 = 0.0;
      for (int b = 0; b < kBlocks; ++b) {
        const std::size_t nc = d.blocks[b].values[i].size();
        Dense<double> t(nc);
        for (std::size_t c = 0; c < nc; ++c)
          t[c] = (seq[k - 2][b].values[i][c] - 8.0 * seq[k - 1][b].values[i][c] + 8.0 * seq[k + 1][b].values[i][c] -
                  seq[k + 2][b].values[i][c]) /
                 (12.0 * dt);
        if (!kInY[b])
          for (std::size_t c = 0; c < nc; ++c) t[c] += (*d.laplacians)[b - kV].values[i][c];
        (kInY[b] ? dY2 : dX2) += std::max(0.0, norm2(t, gi));
      }
      const double lhs_y = std::sqrt(dY2), lhs_x = std::sqrt(dX2);
      const SectionNorms s = section_norms(d, i);
      const double r = d.r[i];
      const double rhs_y = s.X + s.grad_X + s.Y / r;
      const double rhs_x = (s.X + s.grad_X + s.Y) / r;
      auto need = [](double lhs, double rhs) {
        return rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::infinity();
      };
      if (lhs_y >= tiny || rhs_y >= tiny) {
        req[i].used_y = true;
        req[i].cy = need(lhs_y, rhs_y);
      }
      if (lhs_x >= tiny || rhs_x >= tiny) {
        req[i].used_x = true;
        req[i].cx = need(lhs_x, rhs_x);
      }
    });
    for (int i = 0; i < grid.n; ++i) {
      if (i < fit.margin || i >= grid.n - fit.margin || d.r[i] < fit.r_min) continue;
      const Req& q = req[i];
      fc.checked += int(q.used_y) + int(q.used_x);
      fc.excluded += int(!q.used_y) + int(!q.used_x);
      auto take = [&](double c, double& slot, const char* which) {
        slot = std::max(slot, c);
        if (c > fc.C) {
          fc.C = c;
          fc.arg_node = i;
          fc.arg_slice = int(k);
          fc.arg_inequality = which;
          fc.arg_r = d.r[i];
        }
      };
      if (q.used_y) take(q.cy, fc.C_Y, "Y");
      if (q.used_x) take(q.cx, fc.C_X, "X");
    }
  }
  return fc;
}

BlockDecay decay_profile(const DiffBundle& d) {
  BlockDecay p;
  const int n = d.grid.n;
  if (n == 0) return p;
  const double r0 = d.r.front(), r1 = d.r.back();
  for (double lo = r0; lo < r1; lo *= 2.0) p.annuli.push_back({lo, 2.0 * lo});
  p.sup.assign(p.annuli.size(), {});
  p.scaled.assign(p.annuli.size(), {});
  p.total_scaled.assign(p.annuli.size(), 0.0);
  std::vector<std::array<double, kBlocks>> nodal(n);
  parallel_for(std::size_t(n), [&](std::size_t i) { nodal[i] = d.norms(int(i)); });
  for (int i = 0; i < n; ++i) {
    std::size_t k = 0;
    while (k + 1 < p.annuli.size() && d.r[i] >= p.annuli[k].second) ++k;
    double total = 0.0;
    for (int b = 0; b < kBlocks; ++b) {
      p.sup[k][b] = std::max(p.sup[k][b], nodal[i][b]);
      total += nodal[i][b];
    }
    for (double g : d.grad_norms[i]) total += g;
    p.total_scaled[k] = std::max(p.total_scaled[k], d.r[i] * d.r[i] * total);
  }
  std::vector<double> lx;
  for (const auto& a : p.annuli) lx.push_back(std::log(a.first));
  for (std::size_t k = 0; k < p.annuli.size(); ++k)
    for (int b = 0; b < kBlocks; ++b) p.scaled[k][b] = p.sup[k][b] * p.annuli[k].first * p.annuli[k].first;
  for (int b = 0; b < kBlocks; ++b) {
    std::vector<double> ly;
    bool zero = false;
    for (const auto& s : p.sup) {
      if (!(s[b] > 0.0)) zero = true;
      ly.push_back(std::log(s[b]));
    }
    p.exponent[b] = zero || lx.size() < 2 ? -std::numeric_limits<double>::infinity() : fit_slope(lx, ly);
  }
  return p;
}

}  // namespace g2lab
