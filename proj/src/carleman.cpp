#include "g2lab/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <Eigen/Dense>

#include "g2lab/parallel.hpp"

namespace g2lab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

double logaddexp(double x, double y) {
  if (x == -kInf) return y;
  if (y == -kInf) return x;
  const double m = std::max(x, y);
  return m + std::log(std::exp(x - m) + std::exp(y - m));
}

// Running log-sum-exp in a fixed order.
struct LogSum {
  double m = -kInf, s = 0.0;
  void add(double x) {
    if (x == -kInf) return;
    if (x > m) {
      s = s * std::exp(m - x) + 1.0;
      m = x;
    } else {
      s += std::exp(x - m);
    }
  }
  void merge(const LogSum& o) {
    if (o.m == -kInf) return;
    if (o.m > m) {
      s = s * std::exp(m - o.m) + o.s;
      m = o.m;
    } else {
      s += o.s * std::exp(o.m - m);
    }
  }
  double log() const { return m == -kInf ? -kInf : m + std::log(s); }
};

double d5(const std::vector<double>& f, double h) { return (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h); }

// Indices of states with two equally spaced neighbours on each side.
std::vector<std::size_t> five_point_centres(const BackwardFlow& flow) {
  std::vector<std::size_t> out;
  const auto& st = flow.states;
  for (std::size_t k = 2; k + 2 < st.size(); ++k) {
    const double h = st[k + 1].tau - st[k].tau;
    bool even = std::abs(h) > 0.0;
    for (int q = -2; q < 2; ++q) {
      const double hq = st[k + q + 1].tau - st[k + q].tau;
      even = even && std::abs(hq - h) <= 1e-12 * std::abs(h);
    }
    if (!even) throw std::invalid_argument("five-point tau derivative needs equally spaced states");
    out.push_back(k);
  }
  return out;
}

template <class S>
std::array<double, 49> mat49(const Mat7<S>& m) {
  std::array<double, 49> r{};
  for (int a = 0; a < 49; ++a) r[a] = value(m[a]);
  return r;
}

struct NodeJets {
  NodeGeometry<2> G;
  J<2> f, h;
  std::array<double, 49> ginv{};
};

NodeJets node_jets(const BackwardFlow& flow, const BackwardFlowState& st, int i) {
  const auto mj = backward_jets<2>(flow.model, st.tau, st.psi[i]);
  NodeJets nj{node_geometry<2>(mj.phi, flow.model.link()), mj.f, sqrt(mj.f * st.tau) * 2.0, {}};
  nj.ginv = mat49(truncate_mat<J<0>>(nj.G.met.ginv));
  return nj;
}

double laplacian(const J<2>& u, const NodeJets& nj) {
  const auto H = hessian<2>(u, nj.G.sg1, nj.G.sg2);
  double s = 0.0;
  for (int a = 0; a < 49; ++a) s += nj.ginv[a] * value(H[a]);
  return s;
}

// Trapezoid weights on a uniform grid.
double trap(int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; }

}  // namespace

CarlemanParams::CarlemanParams(double alpha, double a, double rho, double delta, double eta, double tau0, double gamma,
                               int n, int kernel_denominator)
    : alpha(alpha), a(a), rho(rho), delta(delta), eta(eta), tau0(tau0), gamma(gamma), n(n),
      kernel_denominator(kernel_denominator) {
  validate();
}

void CarlemanParams::validate() const {
  require(alpha >= 1.0, "alpha must be >= 1");
  require(a > 0.0 && a < 1.0, "a must lie in (0, 1)");
  require(rho > 0.0, "rho must be positive");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  require(eta > 0.0 && eta < 1.0, "eta must lie in (0, 1)");
  require(tau0 > 0.0 && tau0 <= 1.0, "tau0 must lie in (0, 1]");
  require(gamma > 0.0, "gamma must be positive");
  require(n >= 1, "dimension must be positive");
  require(kernel_denominator == 4 || kernel_denominator == 8, "kernel denominator must be 4 or 8");
}

double sigma_a(double t, double a) {
  const double s = t + a;
  return s * std::exp(-s / 3.0);
}

double sigma_a_dot(double t, double a) {
  const double s = t + a;
  return (1.0 - s / 3.0) * std::exp(-s / 3.0);
}

double sigma_a_log_ratio(double t, double a) {
  const double s = t + a;
  const double log_dd = -1.0 / (s * s);  // (log s - s/3)''
  return -sigma_a(t, a) / sigma_a_dot(t, a) * log_dd;
}

double weight_H1(double h, double tau, const CarlemanParams& p) {
  return std::exp(p.alpha * (p.tau0 - tau) * std::pow(h, 2.0 - p.delta) + h * h);
}

double weight_H2(double h, double tau, double a, double rho) {
  const double s = tau + a;
  return std::pow(s, -3.5) * std::exp(-(h - rho) * (h - rho) / (4.0 * s));
}

double weight_H2hat(double r, double tau, double a, double rho, int denom) {
  require(denom == 4 || denom == 8, "kernel denominator must be 4 or 8");
  return std::exp(-(r - rho) * (r - rho) / (denom * (tau + a)));
}

H1Terms h1_terms(const HNode& nd, double tau, const CarlemanParams& p) {
  require(nd.h > 0.0, "h must be positive");
  const double k = p.alpha * (p.tau0 - tau), e = 2.0 - p.delta;
  const double w_h = k * e * std::pow(nd.h, 1.0 - p.delta) + 2.0 * nd.h;
  const double w_hh = k * e * (1.0 - p.delta) * std::pow(nd.h, -p.delta) + 2.0;
  const double w_t = -p.alpha * std::pow(nd.h, e);
  H1Terms o;
  o.phi = k * std::pow(nd.h, e) + nd.h * nd.h;
  for (int i = 0; i < 7; ++i) o.grad[i] = w_h * nd.grad[i];
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) o.hess[i * 7 + j] = w_h * nd.hess[i * 7 + j] + w_hh * nd.grad[i] * nd.grad[j];
  double gh2 = 0.0, lap_h = 0.0;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      gh2 += nd.ginv[i * 7 + j] * nd.grad[i] * nd.grad[j];
      lap_h += nd.ginv[i * 7 + j] * nd.hess[i * 7 + j];
    }
  o.dtau = w_t + w_h * nd.dtau_h;
  o.laplacian = w_h * lap_h + w_hh * gh2;
  o.grad_norm2 = w_h * w_h * gh2;
  o.F1 = o.dtau - o.laplacian - o.grad_norm2 + 2.0 / 3.0 * nd.R;
  Eigen::Matrix<double, 7, 7> A, B;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      A(i, j) = 0.5 * (o.hess[i * 7 + j] + o.hess[j * 7 + i]);
      B(i, j) = 0.5 * (nd.g[i * 7 + j] + nd.g[j * 7 + i]);
    }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix<double, 7, 7>> es(A, B, Eigen::EigenvaluesOnly);
  o.min_hess_eig = es.eigenvalues().minCoeff();
  return o;
}

std::vector<HNode> h_nodes(const BackwardFlow& flow, std::size_t k) {
  require(k < flow.states.size(), "state index out of range");
  const auto& st = flow.states[k];
  std::vector<HNode> out(flow.grid.n);
  parallel_for(std::size_t(flow.grid.n), [&](std::size_t q) {
    const NodeJets nj = node_jets(flow, st, int(q));
    HNode& nd = out[q];
    nd.h = value(nj.h);
    require(nd.h > 0.0, "h needs f > 0");
    nd.grad[0] = value(derivative(nj.h));
    nd.hess = mat49(hessian<2>(nj.h, nj.G.sg1, nj.G.sg2));
    nd.g = mat49(truncate_mat<J<0>>(nj.G.met.g));
    nd.ginv = nj.ginv;
    nd.R = value(nj.G.R);
    const double df = value(derivative(nj.f));
    const double E = nd.R + nj.ginv[0] * df * df - value(nj.f) / st.tau;
    nd.dtau_h = 2.0 * st.tau * (nd.R - E) / nd.h;
  });
  return out;
}

double h2_heat_formula(double h, double tau, double a, double rho, double R, double E, H2Sign sign) {
  const double s = tau + a;
  const double pm = sign == H2Sign::derived ? -1.0 : 1.0;
  const double c = tau * tau * (h - rho) * (h - rho) / (h * h * s * s) + pm * 2.0 * tau * tau * rho / (h * h * h * s) +
                   pm * tau * (h - rho) / (h * s);
  return c * (R - E) - 3.0 * rho / (h * s) + 2.0 * tau * R / (3.0 * s) * (rho / h - 1.0);
}

H2HeatCheck h2_conjugate_heat_check(const BackwardFlow& flow, double a, double rho) {
  H2HeatCheck rep;
  const int n = flow.grid.n;
  for (std::size_t k : five_point_centres(flow)) {
    const auto& st = flow.states[k];
    const double dt = flow.states[k + 1].tau - st.tau;
    std::vector<std::array<double, 3>> r(n);
    parallel_for(std::size_t(n), [&](std::size_t q) {
      const int i = int(q);
      const NodeJets nj = node_jets(flow, st, i);
      const double s = st.tau + a;
      const J<2> d = nj.h - rho;
      const J<2> H = exp(d * d * (-1.0 / (4.0 * s))) * std::pow(s, -3.5);
      std::vector<double> hv(5);
      for (int m = 0; m < 5; ++m) {
        const auto& sm = flow.states[k + m - 2];
        hv[m] = weight_H2(sm.h.values[i][0], sm.tau, a, rho);
      }
      const double direct = (d5(hv, dt) - laplacian(H, nj)) / value(H);
      const double R = value(nj.G.R), hh = value(nj.h), df = value(derivative(nj.f));
      const double E = R + nj.ginv[0] * df * df - value(nj.f) / st.tau;
      r[q] = {std::abs(direct - h2_heat_formula(hh, st.tau, a, rho, R, E, H2Sign::derived)),
              std::abs(direct - h2_heat_formula(hh, st.tau, a, rho, R, E, H2Sign::stated)), std::abs(direct)};
    });
    for (const auto& v : r) {
      rep.derived_gap = std::max(rep.derived_gap, v[0]);
      rep.stated_gap = std::max(rep.stated_gap, v[1]);
      rep.scale = std::max(rep.scale, v[2]);
    }
    ++rep.checked_states;
  }
  return rep;
}

double heat_kernel_residual(const BackwardFlow& flow) {
  double worst = 0.0;
  const int n = flow.grid.n;
  for (std::size_t k : five_point_centres(flow)) {
    const auto& st = flow.states[k];
    const double dt = flow.states[k + 1].tau - st.tau;
    std::vector<double> r(n);
    parallel_for(std::size_t(n), [&](std::size_t q) {
      const int i = int(q);
      const NodeJets nj = node_jets(flow, st, i);
      const J<2> H = exp(-nj.f) * std::pow(st.tau, -3.5);
      std::vector<double> hv(5);
      for (int m = 0; m < 5; ++m) {
        const auto& sm = flow.states[k + m - 2];
        hv[m] = std::pow(sm.tau, -3.5) * std::exp(-sm.f.values[i][0]);
      }
      r[q] = std::abs(d5(hv, dt) - laplacian(H, nj) + 2.0 / 3.0 * value(nj.G.R) * value(H));
    });
    for (double v : r) worst = std::max(worst, v);
  }
  return worst;
}

KernelComparison compare_H2_kernels(const BackwardFlow& flow, double a, double rho, double r_min) {
  require(cone_radius(flow.model, 1.0).has_value(), "kernel comparison needs a cone-type model");
  KernelComparison c;
  c.min_ratio = kInf;
  for (const auto& st : flow.states)
    for (int i = 0; i < flow.grid.n; ++i) {
      const double r = *cone_radius(flow.model, flow.grid.node(i));
      if (r < r_min) continue;
      const double s = st.tau + a, h = st.h.values[i][0];
      const double q = std::exp(-((h - rho) * (h - rho) - (r - rho) * (r - rho)) / (4.0 * s));
      c.min_ratio = std::min(c.min_ratio, q);
      c.max_ratio = std::max(c.max_ratio, q);
      ++c.nodes;
    }
  if (c.nodes == 0) c.min_ratio = 0.0;
  return c;
}

std::array<double, 3> CutoffPsi::eval(double r) const {
  auto step = [](double x) -> std::array<double, 3> {
    if (x <= 0.0) return {0.0, 0.0, 0.0};
    if (x >= 1.0) return {1.0, 0.0, 0.0};
    return {x * x * x * (10.0 - 15.0 * x + 6.0 * x * x), 30.0 * x * x * (1.0 - x) * (1.0 - x),
            60.0 * x * (1.0 - x) * (1.0 - 2.0 * x)};
  };
  const double l1 = rho / 6.0;
  if (r < rho / 3.0) {
    const auto s = step((r - l1) / l1);
    return {s[0], s[1] / l1, s[2] / (l1 * l1)};
  }
  if (r <= 2.0 * xi) return {1.0, 0.0, 0.0};
  const auto s = step((r - 2.0 * xi) / xi);
  return {1.0 - s[0], -s[1] / xi, -s[2] / (xi * xi)};
}

std::vector<double> CutoffPsi::junctions() const { return {rho / 6.0, rho / 3.0, 2.0 * xi, 3.0 * xi}; }

CutoffPsi cutoff_psi(double rho, double xi, double inner_radius) {
  require(xi > 4.0 * rho, "cutoff needs xi > 4 rho");
  require(rho > 12.0 * inner_radius, "cutoff needs rho > 12 times the inner radius");
  return CutoffPsi{rho, xi};
}

double cutoff_constant(const CutoffPsi& psi, int n, int samples) {
  double sup = 0.0;
  const auto j = psi.junctions();
  for (int ramp = 0; ramp < 2; ++ramp) {
    const double lo = j[2 * ramp], hi = j[2 * ramp + 1];
    for (int q = 0; q <= samples; ++q) {
      const double r = lo + (hi - lo) * q / samples;
      const auto v = psi.eval(r);
      sup = std::max(sup, std::abs(v[1]) + std::abs(v[2]) + (n - 1) * std::abs(v[1]) / r);
    }
  }
  return psi.rho * sup;
}

StirlingResult stirling_bound(int k, double rho, double c) {
  require(k >= 0, "k must be non-negative");
  require(rho > 0.0 && c > 0.0, "rho and c must be positive");
  if (k == 0) return {1.0, kInf, 1.0};
  const double lr = -2.0 * k * std::log(rho);
  return {std::exp(lr + k * std::log(c * k) - k), rho * rho / (c * k), std::exp(lr + k * std::log(c) + std::lgamma(k + 1.0))};
}

double stirling_min_constant(double c, int k_max) {
  require(k_max >= 1, "k_max must be at least 1");
  double C = 0.0;
  for (int k = 1; k <= k_max; ++k) C = std::max(C, std::exp(std::log(c * k) - 1.0 - std::lgamma(k + 1.0) / k));
  return C;
}

ScalarSpaceTimeField ScalarSpaceTimeField::sample(const SpaceTimeGrid& g, const std::function<double(double, double)>& f) {
  require(g.nr >= 9 && g.nt >= 9, "space-time grids need at least 9 nodes per direction");
  ScalarSpaceTimeField z;
  z.grid = g;
  z.values.resize(std::size_t(g.nr) * g.nt);
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.nt; ++j) z.values[std::size_t(i) * g.nt + j] = f(g.r(i), g.t(j));
  return z;
}

WeightField::WeightField(WeightKind k, ScalarSpaceTimeField f) : kind(k), field(std::move(f)) {
  for (double v : field.values)
    if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("weight must be positive and finite");
}

WeightField tabulate_H1(const SpaceTimeGrid& g, const CarlemanParams& p) {
  return WeightField(WeightKind::H1, ScalarSpaceTimeField::sample(g, [&](double r, double t) { return weight_H1(r, t, p); }));
}
WeightField tabulate_H2(const SpaceTimeGrid& g, double a, double rho) {
  return WeightField(WeightKind::H2,
                     ScalarSpaceTimeField::sample(g, [&](double r, double t) { return weight_H2(r, t, a, rho); }));
}
WeightField tabulate_H2hat(const SpaceTimeGrid& g, double a, double rho, int denom) {
  return WeightField(WeightKind::H2hat, ScalarSpaceTimeField::sample(
                                            g, [&](double r, double t) { return weight_H2hat(r, t, a, rho, denom); }));
}
WeightField tabulate_sigma_power(const SpaceTimeGrid& g, double a, double power) {
  return WeightField(WeightKind::sigma_power, ScalarSpaceTimeField::sample(
                                                  g, [&](double, double t) { return std::pow(sigma_a(t, a), power); }));
}

namespace {

// Derivatives of a tabulated field by second-order stencils in r and t.
struct Derivs {
  std::vector<double> v, r, rr, t;
};

Derivs derivs(const ScalarSpaceTimeField& f, int accuracy) {
  const auto& g = f.grid;
  const StencilSet sr = make_stencils(RadialGrid(g.r_lo, g.r_hi, g.nr), 2, accuracy);
  const StencilSet st = make_stencils(RadialGrid(g.t_lo, g.t_hi, g.nt), 1, accuracy);
  const std::size_t N = f.values.size();
  Derivs d{f.values, std::vector<double>(N), std::vector<double>(N), std::vector<double>(N)};
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.nt; ++j) {
      double a1 = 0.0, a2 = 0.0, b1 = 0.0;
      for (int q = 0; q < sr.width(i); ++q) {
        const double v = f.at(sr.first[i] + q, j);
        a1 += sr.w[i][1][q] * v;
        a2 += sr.w[i][2][q] * v;
      }
      for (int q = 0; q < st.width(j); ++q) b1 += st.w[j][1][q] * f.at(i, st.first[j] + q);
      const std::size_t k = std::size_t(i) * g.nt + j;
      d.r[k] = a1;
      d.rr[k] = a2;
      d.t[k] = b1;
    }
  return d;
}

bool same_grid(const SpaceTimeGrid& a, const SpaceTimeGrid& b) {
  return a.r_lo == b.r_lo && a.r_hi == b.r_hi && a.nr == b.nr && a.t_lo == b.t_lo && a.t_hi == b.t_hi &&
         a.nt == b.nt && a.n == b.n;
}

}  // namespace

ScalarSpaceTimeField canonical_F(const WeightField& H, int accuracy) {
  const auto& g = H.field.grid;
  const Derivs d = derivs(H.field, accuracy);
  ScalarSpaceTimeField F = H.field;
  for (int i = 0; i < g.nr; ++i)
    for (int j = 0; j < g.nt; ++j) {
      const std::size_t k = std::size_t(i) * g.nt + j;
      const double lap = d.rr[k] + (g.n - 1) / g.r(i) * d.r[k];
      F.values[k] = (d.t[k] - lap) / d.v[k];
    }
  return F;
}

DivergenceIdentity divergence_identity_residual(const ScalarSpaceTimeField& Z, const WeightField& Hw,
                                                const ScalarSpaceTimeField& F, int accuracy) {
  const auto& g = Z.grid;
  require(same_grid(g, Hw.field.grid) && same_grid(g, F.grid), "Z, H and F must share the grid");
  if (!Z.compact_support || !Z.initial_vanishing) throw SupportViolation("Z must be compactly supported and vanish at t = 0");
  double zmax = 0.0;
  for (double v : Z.values) zmax = std::max(zmax, std::abs(v));
  const double tol = 1e-12 * zmax;
  for (int j = 0; j < g.nt; ++j)
    for (int i : {0, 1, g.nr - 2, g.nr - 1})
      if (std::abs(Z.at(i, j)) > tol)
        throw SupportViolation("Z reaches the radial boundary at r = " + std::to_string(g.r(i)));
  for (int i = 0; i < g.nr; ++i)
    if (std::abs(Z.at(i, 0)) > tol) throw SupportViolation("Z(., 0) is not zero at r = " + std::to_string(g.r(i)));

  const bool simpson = accuracy >= 4;
  if (simpson && (g.nr % 2 == 0 || g.nt % 2 == 0)) throw std::invalid_argument("Simpson weights need odd node counts");
  auto qw = [simpson](int i, int n) {
    if (!simpson) return trap(i, n);
    if (i == 0 || i == n - 1) return 1.0 / 3.0;
    return i % 2 ? 4.0 / 3.0 : 2.0 / 3.0;
  };
  const Derivs z = derivs(Z, accuracy), h = derivs(Hw.field, accuracy), f = derivs(F, accuracy);
  const double dr = (g.r_hi - g.r_lo) / (g.nr - 1), dt = (g.t_hi - g.t_lo) / (g.nt - 1);
  DivergenceIdentity out;
  double lhs = 0.0, rhs = 0.0;
  for (int i = 0; i < g.nr; ++i) {
    const double r = g.r(i), mu = std::pow(r, g.n - 1) * qw(i, g.nr) * dr;
    for (int j = 0; j < g.nt; ++j) {
      const std::size_t k = std::size_t(i) * g.nt + j;
      const double Zv = z.v[k], Zr = z.r[k], Zt = z.t[k], H = h.v[k], Fv = f.v[k];
      const double Lr = h.r[k] / H, Lrr = h.rr[k] / H - Lr * Lr;
      const double lapZ = z.rr[k] + (g.n - 1) / r * Zr;
      const double lapH = h.rr[k] + (g.n - 1) / r * h.r[k];
      const double lapF = f.rr[k] + (g.n - 1) / r * f.r[k];
      const double AZ = Zt - Lr * Zr + 0.5 * Fv * Zv;
      const double Wq = Zr * Zr + 0.5 * Fv * Zv * Zv;
      const double val = 2.0 * AZ * (Zt + lapZ) * H - 2.0 * AZ * AZ * H + (Fv - (h.t[k] - lapH) / H) * Wq * H -
                         0.5 * (f.t[k] + lapF) * Zv * Zv * H - 2.0 * Lrr * Zr * Zr * H;
      rhs += val * mu * qw(j, g.nt) * dt;
      if (j == g.nt - 1) lhs -= Wq * H * mu;
      if (j == 0) lhs += Wq * H * mu;
    }
  }
  out.lhs = lhs;
  out.rhs = rhs;
  out.residual = std::abs(lhs - rhs);
  return out;
}

const char* variant_name(CarlemanVariant v) {
  switch (v) {
    case CarlemanVariant::gaussian: return "gaussian";
    case CarlemanVariant::gaussian_log: return "gaussian_log";
    case CarlemanVariant::H1_pde: return "H1_pde";
    case CarlemanVariant::H1_ode: return "H1_ode";
    case CarlemanVariant::ode_sup: return "ode_sup";
  }
  return "?";
}

double RatioResult::lhs() const { return std::exp(log_lhs); }
double RatioResult::rhs() const { return std::exp(log_rhs); }
std::optional<double> RatioResult::ratio() const {
  if (outcome != RatioOutcome::ok) return std::nullopt;
  return std::exp(log_lhs - log_rhs);
}

RatioResult carleman_ratio(const TestFunction& u, const CarlemanParams& p, CarlemanVariant v,
                           const QuadratureOptions& q) {
  p.validate();
  require(u.r_hi > u.r_lo && u.r_lo > 0.0, "test function needs a radial support interval");
  require(q.refine >= 1 && q.r_nodes >= 9, "quadrature needs at least 9 radial nodes");
  const bool h1 = v == CarlemanVariant::H1_pde || v == CarlemanVariant::H1_ode;
  const bool gaussian = !h1;
  if ((v == CarlemanVariant::gaussian || v == CarlemanVariant::gaussian_log) && u.r_lo < p.gamma * p.rho * (1.0 - 1e-12))
    throw SupportViolation("test function reaches below gamma rho");
  if (v == CarlemanVariant::gaussian_log && u.r_lo < 1.0) throw SupportViolation("log r term needs r >= 1");

  // Radial nodes r = c + w sinh(xi), clustered at rho for the Gaussian variants.
  const double c = std::clamp(p.rho, u.r_lo, u.r_hi);
  const double w = gaussian ? std::sqrt(p.a) : (u.r_hi - u.r_lo);
  const int nr = (q.r_nodes - 1) * q.refine + 1;
  const double x0 = std::asinh((u.r_lo - c) / w), x1 = std::asinh((u.r_hi - c) / w);
  const double hx = (x1 - x0) / (nr - 1);

  // Time nodes uniform in log(t + shift).
  const double T = h1 ? p.tau0 : 1.0;
  const double shift = h1 ? 1.0 / (p.alpha * std::pow(u.r_hi, 2.0 - p.eta) + 1.0) : p.a;
  const double l0 = std::log(shift), l1 = std::log(T + shift);
  const double rate = h1 ? 16.0 : (2.0 * p.alpha + 1.0);
  const int nt_base = std::max(q.min_t_nodes, int(std::ceil(q.t_nodes_per_efold * rate * (l1 - l0))));
  const int nt = (nt_base - 1) * q.refine + 1;
  const double hl = (l1 - l0) / (nt - 1);

  // Norm slots: u at alpha + 1/2, grad u at alpha, (d_t + Delta) u at alpha,
  // (log r)^1/2 u at alpha + 1/2, d_t u at alpha, grad u on the final slice.
  enum { kU, kGrad, kL, kLog, kT, kFinal, kSlots };
  std::vector<std::array<LogSum, kSlots>> rows(nt);
  std::vector<double> umax(nt, 0.0);
  const double n1 = p.n - 1;
  parallel_for(std::size_t(nt), [&](std::size_t jq) {
    const int j = int(jq);
    const double s_shift = std::exp(l0 + hl * j);
    const double t = std::clamp(s_shift - shift, 0.0, T);
    const double jt = s_shift * hl * trap(j, nt);
    double lw_sig = 0.0;
    if (gaussian) lw_sig = -2.0 * p.alpha * std::log(sigma_a(t, p.a));
    const double lw_half = gaussian ? -std::log(sigma_a(t, p.a)) : 0.0;  // extra power 1/2, squared
    auto& acc = rows[j];
    for (int i = 0; i < nr; ++i) {
      const double xi = x0 + hx * i;
      const double r = c + w * std::sinh(xi);
      const double jr = w * std::cosh(xi) * hx * trap(i, nr);
      const PointValues pv = u.f(r, t);
      umax[j] = std::max(umax[j], std::abs(pv.u));
      double lw;
      if (gaussian) {
        lw = lw_sig - 2.0 * (r - p.rho) * (r - p.rho) / (p.kernel_denominator * (t + p.a));
      } else {
        lw = p.alpha * (p.tau0 - t) * std::pow(r, 2.0 - p.eta) + r * r;
      }
      const double base = lw + n1 * std::log(r) + std::log(jr * jt);
      auto put = [&](int slot, double val, double extra) {
        if (val != 0.0) acc[slot].add(base + extra + 2.0 * std::log(std::abs(val)));
      };
      const double Lu = pv.ut + pv.urr + n1 / r * pv.ur;
      put(kU, pv.u, lw_half);
      put(kGrad, pv.ur, 0.0);
      put(kL, Lu, 0.0);
      if (r > 1.0) put(kLog, pv.u * std::sqrt(std::log(r)), lw_half);
      put(kT, pv.ut, 0.0);
      if (j == nt - 1 && pv.ur != 0.0)
        acc[kFinal].add(lw + n1 * std::log(r) + std::log(jr) + 2.0 * std::log(std::abs(pv.ur)));
    }
  });
  std::array<LogSum, kSlots> tot;
  double sup_u = 0.0;
  for (int j = 0; j < nt; ++j) {
    for (int k = 0; k < kSlots; ++k) tot[k].merge(rows[j][k]);
    sup_u = std::max(sup_u, umax[j]);
  }
  auto N = [&](int k) { return 0.5 * tot[k].log(); };  // log of the L^2 norm
  const double la = std::log(p.alpha);
  RatioResult res;
  switch (v) {
    case CarlemanVariant::gaussian:
    case CarlemanVariant::gaussian_log:
      res.log_lhs = logaddexp(0.5 * la + N(kU), N(kGrad));
      res.log_rhs = N(kL);
      if (v == CarlemanVariant::gaussian_log) res.log_rhs = logaddexp(res.log_rhs, N(kLog));
      break;
    case CarlemanVariant::ode_sup: {
      res.log_lhs = N(kU);
      const double tail = sup_u > 0.0 ? -0.5 * std::log(p.a) + 0.5 * p.n * std::log(p.rho + std::sqrt(p.a)) -
                                            p.alpha * (std::log(p.a) + 0.125) + std::log(sup_u)
                                      : -kInf;
      res.log_rhs = logaddexp(-la + N(kT), tail);
      break;
    }
    case CarlemanVariant::H1_pde:
      res.log_lhs = logaddexp(la + 2.0 * N(kU), 2.0 * N(kGrad));
      res.log_rhs = logaddexp(std::log(0.5) + 2.0 * N(kL), tot[kFinal].log());
      break;
    case CarlemanVariant::H1_ode:
      res.log_lhs = la + 2.0 * N(kU);
      res.log_rhs = std::log(2.0) + 2.0 * N(kT);
      break;
  }
  if (!(res.log_rhs >= std::log(1e-14))) res.outcome = RatioOutcome::degenerate_denominator;
  return res;
}

std::vector<SweepRow> carleman_sweep(const TestFunction& u, const CarlemanParams& base, CarlemanVariant v,
                                     const SweepRanges& ranges, const QuadratureOptions& q) {
  std::vector<SweepRow> rows;
  for (double al : ranges.alphas)
    for (double a : ranges.as)
      for (double rho : ranges.rhos) {
        CarlemanParams p = base;
        p.alpha = al;
        p.a = a;
        p.rho = rho;
        p.validate();
        rows.push_back({v, p, carleman_ratio(u, p, v, q)});
      }
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "variant,alpha,a,rho,delta,eta,n,LHS,RHS,ratio,outcome\n";
  const auto old = os.precision(17);
  for (const auto& r : rows) {
    const auto ratio = r.result.ratio();
    os << variant_name(r.variant) << ',' << r.params.alpha << ',' << r.params.a << ',' << r.params.rho << ','
       << r.params.delta << ',' << r.params.eta << ',' << r.params.n << ',' << r.result.lhs() << ',' << r.result.rhs()
       << ',';
    if (ratio) os << *ratio;
    os << ',' << (ratio ? "ok" : "degenerate_denominator") << '\n';
  }
  os.precision(old);
}

TestFunction bump_test_function(std::string name, double center, double width, int t_power, double oscillation) {
  require(width > 0.0 && t_power >= 1, "bump needs a positive width and t power");
  TestFunction tf;
  tf.name = std::move(name);
  tf.r_lo = center - width;
  tf.r_hi = center + width;
  tf.f = [=](double r, double t) {
    const double x = (r - center) / width;
    if (std::abs(x) >= 1.0) return PointValues{};
    J<2> xr = J<2>::variable(r);
    J<2> y = (xr - center) / width;
    J<2> b = exp(-1.0 / (1.0 - y * y));
    if (oscillation != 0.0) b = b * cos((xr - center) * oscillation);
    const double om = 1.0 - t;
    const double th = std::pow(t, t_power) * om * om * om;
    const double dth = t_power * std::pow(t, t_power - 1) * om * om * om - 3.0 * std::pow(t, t_power) * om * om;
    return PointValues{th * b.c[0], th * b.c[1], th * 2.0 * b.c[2], dth * b.c[0]};
  };
  return tf;
}

DecayFit exp_decay_experiment(const Subsolution& u, const std::vector<double>& rhos, double s, int n,
                              const DecayOptions& opt) {
  require(s > 0.0 && s < 1.0, "s must lie in (0, 1)");
  require(rhos.size() >= 2, "decay fit needs at least two radii");
  require(opt.r_nodes >= 3 && opt.t_nodes >= 3, "decay quadrature needs nodes");
  DecayFit fit;
  fit.s = s;
  const double rs = std::sqrt(s);
  for (double rho : rhos) {
    const double lo = (1.0 - rs) * rho, hi = (1.0 + rs) * rho;
    const double dr = (hi - lo) / (opt.r_nodes - 1), dt = s / (opt.t_nodes - 1);
    LogSum acc;
    for (int i = 0; i < opt.r_nodes; ++i)
      for (int j = 0; j < opt.t_nodes; ++j) {
        const double r = lo + dr * i, t = dt * j;
        const PointValues pv = u.f(r, t);
        const double lap = pv.urr + (n - 1) / r * pv.ur;
        if (pv.u != 0.0 && std::log(std::abs(pv.u)) > std::log(u.M) + u.M * r * r)
          throw HypothesisViolation("growth bound |u| <= M exp(M r^2) fails", r, t);
        const double lhs = std::abs(lap + pv.ut);
        const double bound = u.M * std::abs(pv.ur) + (u.N * std::pow(r, u.delta) + u.M) * std::abs(pv.u);
        const double slack = 1e-9 * (std::abs(pv.urr) + std::abs((n - 1) / r * pv.ur) + std::abs(pv.ut));
        if (lhs > bound + slack) throw HypothesisViolation("differential inequality fails", r, t);
        const double g = std::abs(pv.u) + std::abs(pv.ur);
        if (g > 0.0)
          acc.add(2.0 * std::log(g) + (n - 1) * std::log(r) + std::log(dr * dt * trap(i, opt.r_nodes) * trap(j, opt.t_nodes)));
      }
    fit.rho.push_back(rho);
    fit.rho2.push_back(rho * rho);
    fit.log_norm.push_back(0.5 * acc.log());
  }
  const std::size_t m = fit.rho2.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    mx += fit.rho2[k] / m;
    my += fit.log_norm[k] / m;
  }
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double dx = fit.rho2[k] - mx, dy = fit.log_norm[k] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

Subsolution backward_heat_kernel(double T, int n) {
  require(T > 0.0, "T must be positive");
  Subsolution s;
  s.name = "backward_heat_kernel";
  s.M = 5.0;
  s.N = 1.0;
  s.delta = 0.25;
  s.f = [=](double r, double t) {
    const double q = T - t;
    if (q <= 0.0) throw std::invalid_argument("backward heat kernel evaluated past its time");
    const double u = std::pow(q, -0.5 * n) * std::exp(-r * r / (4.0 * q));
    return PointValues{u, -r / (2.0 * q) * u, (-1.0 / (2.0 * q) + r * r / (4.0 * q * q)) * u,
                       (0.5 * n / q - r * r / (4.0 * q * q)) * u};
  };
  return s;
}

}  // namespace g2lab
