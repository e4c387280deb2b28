#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "g2lab/g2.hpp"

using namespace g2lab;

namespace {

// Cayley-Dickson doubling: (a,b)(c,d) = (ac - conj(d) b, d a + b conj(c)).
using Oct = std::array<double, 8>;

template <int N>
std::array<double, N> cd_mul(const std::array<double, N>& x, const std::array<double, N>& y) {
  if constexpr (N == 1) {
    return {x[0] * y[0]};
  } else {
    constexpr int H = N / 2;
    std::array<double, H> a, b, c, d;
    for (int i = 0; i < H; ++i) {
      a[i] = x[i];
      b[i] = x[H + i];
      c[i] = y[i];
      d[i] = y[H + i];
    }
    auto conj = [](std::array<double, H> v) {
      for (int i = 1; i < H; ++i) v[i] = -v[i];
      return v;
    };
    auto ac = cd_mul<H>(a, c), db = cd_mul<H>(conj(d), b), da = cd_mul<H>(d, a), bc = cd_mul<H>(b, conj(c));
    std::array<double, N> r;
    for (int i = 0; i < H; ++i) {
      r[i] = ac[i] - db[i];
      r[H + i] = da[i] + bc[i];
    }
    return r;
  }
}

// phi(u,v,w) = <Im(uv), w> on the imaginary octonions e1..e7.
double oct_phi(int i, int j, int k) {
  Oct u{}, v{};
  u[1 + i] = 1.0;
  v[1 + j] = 1.0;
  return cd_mul<8>(u, v)[1 + k];
}

std::mt19937_64& rng() {
  static std::mt19937_64 r(12345);
  return r;
}

AltForm random_form(int k, double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  AltForm a(k);
  for (double& x : a.c) x = nd(rng());
  return a;
}

Mat7<double> random_matrix(double scale) {
  std::normal_distribution<double> nd(0.0, scale);
  Mat7<double> m;
  for (double& x : m) x = nd(rng());
  return m;
}

// (A^* phi)_ijk = A_ai A_bj A_ck phi_abc
AltForm pullback(const AltForm& phi, const Mat7<double>& A) {
  const Dense<double> p = phi.dense();
  AltForm out(3);
  const auto& cs = combinations(3);
  for (std::size_t r = 0; r < cs.size(); ++r) {
    double s = 0.0;
    for (int a = 0; a < 7; ++a)
      for (int b = 0; b < 7; ++b)
        for (int c = 0; c < 7; ++c)
          s += A[idx2(a, cs[r].i[0])] * A[idx2(b, cs[r].i[1])] * A[idx2(c, cs[r].i[2])] * p[idx3(a, b, c)];
    out.c[r] = s;
  }
  return out;
}

AltForm contract_vec(const AltForm& phi, int i) {
  AltForm out(2);
  const auto& cs = combinations(2);
  for (std::size_t r = 0; r < cs.size(); ++r) out.c[r] = phi.get({i, cs[r].i[0], cs[r].i[1]});
  return out;
}

}  // namespace

TEST_CASE("standard phi component table") {
  const ThreeForm p = standard_phi();
  // 1-based table 123 145 167 246 = +1, 257 347 356 = -1
  CHECK(p.get({0, 1, 2}) == 1.0);
  CHECK(p.get({0, 3, 4}) == 1.0);
  CHECK(p.get({0, 5, 6}) == 1.0);
  CHECK(p.get({1, 3, 5}) == 1.0);
  CHECK(p.get({1, 4, 6}) == -1.0);
  CHECK(p.get({2, 3, 6}) == -1.0);
  CHECK(p.get({2, 4, 5}) == -1.0);
  int nonzero = 0;
  for (double x : p.c) nonzero += x != 0.0;
  CHECK(nonzero == 7);
  CHECK(p.get({2, 1, 0}) == -1.0);
}

TEST_CASE("standard phi matches the octonion cross product up to a signed basis permutation") {
  const ThreeForm p = standard_phi();
  // Octonion phi is fully antisymmetric.
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      for (int k = 0; k < 7; ++k) CHECK(oct_phi(i, j, k) == -oct_phi(j, i, k));
  std::array<int, 7> perm;
  std::iota(perm.begin(), perm.end(), 0);
  bool found = false;
  do {
    for (int signs = 0; signs < 128 && !found; ++signs) {
      bool ok = true;
      for (const auto& I : combinations(3)) {
        const int a = I.i[0], b = I.i[1], c = I.i[2];
        double s = ((signs >> a) & 1 ? -1 : 1) * ((signs >> b) & 1 ? -1 : 1) * ((signs >> c) & 1 ? -1 : 1);
        if (s * oct_phi(perm[a], perm[b], perm[c]) != p.get({a, b, c})) {
          ok = false;
          break;
        }
      }
      found = ok;
    }
  } while (!found && std::next_permutation(perm.begin(), perm.end()));
  CHECK(found);
}

TEST_CASE("metric recovery calibration and scaling") {
  const ThreeForm p = standard_phi();
  const Metric7 g = metric_from_phi(p);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) CHECK(std::abs(g.g[idx2(i, j)] - (i == j)) <= 1e-12);
  CHECK(std::abs(g.vol - 1.0) <= 1e-12);
  CHECK(g.orientation == 1);
  CHECK(std::abs(form_norm2(g, p) - 7.0) <= 1e-12);

  const Metric7 g8 = metric_from_phi(8.0 * p);
  for (int i = 0; i < 7; ++i) CHECK(std::abs(g8.g[idx2(i, i)] - 4.0) <= 1e-12);
  CHECK(std::abs(g8.vol - 128.0) <= 1e-9);

  const Metric7 gm = metric_from_phi(-1.0 * p);
  CHECK(gm.orientation == -1);
  for (int i = 0; i < 7; ++i) CHECK(std::abs(gm.g[idx2(i, i)] - 1.0) <= 1e-12);
}

TEST_CASE("metric of a pulled-back phi0 is A^T A") {
  for (int trial = 0; trial < 20; ++trial) {
    Mat7<double> A = random_matrix(0.3);
    for (int i = 0; i < 7; ++i) A[idx2(i, i)] += 1.0;
    if (det7(A) <= 0) continue;
    const AltForm pt = pullback(standard_phi(), A);
    const Metric7 g = metric_from_phi(pt);
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 7; ++j) {
        double s = 0.0;
        for (int a = 0; a < 7; ++a) s += A[idx2(a, i)] * A[idx2(a, j)];
        CHECK(std::abs(g.g[idx2(i, j)] - s) <= 1e-10 * (1 + std::abs(s)));
      }
    // Defining identity via generic wedges: 6 g_ij vol = coeff of (i_i phi)^(i_j phi)^phi.
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 7; ++j) {
        const AltForm w = wedge(wedge(contract_vec(pt, i), contract_vec(pt, j)), pt);
        CHECK(std::abs(w.c[0] - 6.0 * g.g[idx2(i, j)] * g.vol * g.orientation) <= 1e-9 * (1 + std::abs(w.c[0])));
      }
  }
}

TEST_CASE("degenerate forms are rejected") {
  AltForm d(3);
  d.at({0, 1, 2}) = 1.0;
  CHECK_THROWS_AS(metric_from_phi(d), DegenerateForm);
  CHECK_FALSE(is_nondegenerate(AltForm(3)));
}

TEST_CASE("hodge star") {
  const Metric7 g = metric_from_phi(8.0 * standard_phi());
  AltForm one(0);
  one.c[0] = 1.0;
  CHECK(std::abs(hodge_star(g, one).c[0] - g.vol) <= 1e-10);
  for (int k = 0; k <= 7; ++k) {
    const AltForm a = random_form(k, 1.0);
    const AltForm back = hodge_star(g, hodge_star(g, a));
    for (std::size_t r = 0; r < a.c.size(); ++r) CHECK(std::abs(back.c[r] - a.c[r]) <= 1e-12 * 4);
    CHECK(std::abs(form_norm2(g, hodge_star(g, a)) - form_norm2(g, a)) <= 1e-12 * form_norm2(g, a) + 1e-12);
  }
  // *phi0 table, evaluated once from the Euclidean definition.
  const AltForm psi = hodge_star(Metric7::identity(), standard_phi());
  CHECK(psi.get({0, 1, 3, 6}) == -1.0);
  CHECK(psi.get({0, 1, 4, 5}) == -1.0);
  CHECK(psi.get({0, 2, 3, 5}) == -1.0);
  CHECK(psi.get({0, 2, 4, 6}) == 1.0);
  CHECK(psi.get({1, 2, 3, 4}) == 1.0);
  CHECK(psi.get({1, 2, 5, 6}) == 1.0);
  CHECK(psi.get({3, 4, 5, 6}) == 1.0);
  CHECK(std::abs(form_norm2(Metric7::identity(), psi) - 7.0) < 1e-14);
  // alpha ^ *beta = <alpha, beta> vol
  const AltForm a = random_form(3, 1.0), b = random_form(3, 1.0);
  CHECK(std::abs(wedge(a, hodge_star(g, b)).c[0] - form_inner(g, a, b) * g.vol * g.orientation) <= 1e-9);
}

TEST_CASE("irreducible decomposition") {
  const ThreeForm p = standard_phi();
  const Metric7 g = metric_from_phi(p);
  auto d = decompose_three_form(p, p);
  CHECK(std::abs(d.b0 - 1.0 / 3.0) <= 1e-12);
  CHECK(d.b1_norm2 <= 1e-24);
  CHECK(d.b3_norm2 <= 1e-24);

  for (int e = 0; e < 7; ++e) {
    std::array<double, 7> v{};
    v[e] = 1.0;
    const AltForm gamma = hodge_star(g, wedge(one_form(v), p));
    d = decompose_three_form(gamma, p);
    CHECK(std::abs(d.b0) <= 1e-12);
    for (int i = 0; i < 7; ++i) CHECK(std::abs(d.b1[i] - v[i]) <= 1e-12);
    CHECK(d.b3_norm2 <= 1e-24);
  }

  for (int trial = 0; trial < 50; ++trial) {
    const ThreeForm ph = p + random_form(3, 0.1);
    const Metric7 gh = metric_from_phi(ph);
    const AltForm gamma = random_form(3, 1.0);
    d = decompose_three_form(gamma, ph);
    const AltForm part0 = 3.0 * d.b0 * ph;
    const AltForm part1 = hodge_star(gh, wedge(one_form(d.b1), ph));
    CHECK(std::sqrt(form_norm2(gh, reconstruct(d, ph) - gamma)) <= 1e-10);
    const double n = form_norm2(gh, gamma);
    CHECK(std::abs(form_inner(gh, part0, part1)) <= 1e-10 * n);
    CHECK(std::abs(form_inner(gh, part0, d.b3)) <= 1e-10 * n);
    CHECK(std::abs(form_inner(gh, part1, d.b3)) <= 1e-10 * n);
    CHECK(std::abs(form_norm2(gh, part0) + form_norm2(gh, part1) + d.b3_norm2 - n) <= 1e-10 * n);
    // 27-part has no phi or 7-part content left.
    const auto d3 = decompose_three_form(d.b3, ph);
    CHECK(std::abs(d3.b0) <= 1e-10);
    for (double x : d3.b1) CHECK(std::abs(x) <= 1e-10);
  }
}

TEST_CASE("i_phi") {
  const ThreeForm p = standard_phi();
  Sym2 g;
  for (int i = 0; i < 7; ++i) g.h[idx2(i, i)] = 1.0;
  const AltForm ig = i_phi(p, g);
  for (std::size_t r = 0; r < p.c.size(); ++r) CHECK(std::abs(ig.c[r] - 3.0 * p.c[r]) <= 1e-14);
  const AltForm i0 = i_phi(p, Sym2{});
  for (double x : i0.c) CHECK(x == 0.0);
  // Measured constant for traceless h: 2 (the ratio for h = g is 63/7 = 9).
  CHECK(std::abs(measure_i_phi_constant(200, 3) - 2.0) <= 1e-12);
  CHECK(std::abs(form_norm2(Metric7::identity(), ig) / 7.0 - 9.0) <= 1e-12);
  // Linearity.
  const Sym2 a = Sym2::from_matrix(random_matrix(1.0)), b = Sym2::from_matrix(random_matrix(1.0));
  Sym2 c;
  for (int i = 0; i < 49; ++i) c.h[i] = 2.0 * a.h[i] - b.h[i];
  const AltForm lhs = i_phi(p, c), rhs = 2.0 * i_phi(p, a) - i_phi(p, b);
  for (std::size_t r = 0; r < lhs.c.size(); ++r) CHECK(std::abs(lhs.c[r] - rhs.c[r]) <= 1e-12);
}

TEST_CASE("volume second-order expansion") {
  CHECK(volume_second_order_expansion(IrrepDecomp3{}) == 1.0);
  const ThreeForm p = standard_phi();
  const double t = 0.01;
  const auto d = decompose_three_form(t * p, p);
  CHECK(std::abs(volume_second_order_expansion(d) - (1 + 7 * t / 3 + 14 * t * t / 9)) <= 1e-14);
  // Remainder slope along a ray.
  const AltForm dir = random_form(3, 1.0);
  const AltForm hat = (1.0 / std::sqrt(form_norm2(Metric7::identity(), dir))) * dir;
  std::vector<double> xs, ys;
  for (double s = 1e-3; s <= 1e-1 * 1.0001; s *= std::pow(10.0, 0.25)) {
    const AltForm gamma = s * hat;
    const double rem = std::abs(volume_ratio(p, gamma) - volume_second_order_expansion(decompose_three_form(gamma, p)));
    xs.push_back(std::log(s));
    ys.push_back(std::log(rem));
  }
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  CHECK(slope >= 2.7);
  CHECK(slope <= 3.3);
}

TEST_CASE("contraction identity and scaling laws") {
  const ThreeForm p = standard_phi();
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) worst = std::max(worst, contraction_identity_error(p + random_form(3, 0.1)));
  CHECK(worst <= 1e-8);

  const ThreeForm ph = p + random_form(3, 0.1);
  for (double lam : {1.0 / 8.0, 8.0}) {
    const Metric7 g = metric_from_phi(ph), gl = metric_from_phi(lam * ph);
    for (int a = 0; a < 49; ++a) CHECK(std::abs(gl.g[a] - std::pow(lam, 2.0 / 3.0) * g.g[a]) <= 1e-10 * std::pow(lam, 2.0 / 3.0));
    const AltForm s = hodge_star(g, ph), sl = hodge_star(gl, lam * ph);
    for (std::size_t r = 0; r < s.c.size(); ++r)
      CHECK(std::abs(sl.c[r] - std::pow(lam, 4.0 / 3.0) * s.c[r]) <= 1e-10 * std::pow(lam, 4.0 / 3.0));
  }
}

TEST_CASE("perturbation bound sampler") {
  const ThreeForm p = standard_phi();
  const auto r1 = perturbation_bound_sampler(p, 0.05, 2000, 11);
  const auto r2 = perturbation_bound_sampler(p, 0.025, 2000, 11);
  CHECK(r1.samples == 2000);
  CHECK(std::isfinite(r1.sup_metric));
  CHECK(r1.sup_metric > 0.0);
  CHECK(std::abs(r1.sup_metric / r2.sup_metric - 1.0) < 0.2);
  CHECK(std::abs(r1.sup_inverse / r2.sup_inverse - 1.0) < 0.2);
  CHECK(std::abs(r1.sup_hodge / r2.sup_hodge - 1.0) < 0.2);
  // Order independence: rerun is identical.
  const auto r3 = perturbation_bound_sampler(p, 0.05, 2000, 11);
  CHECK(r3.sup_metric == r1.sup_metric);
  CHECK(r3.sup_hodge == r1.sup_hodge);

  // Linear response along a ray: dyadic refinements agree.
  const Metric7 g = Metric7::identity();
  const AltForm dir = random_form(3, 1.0);
  const AltForm hat = (1.0 / std::sqrt(form_norm2(g, dir))) * dir;
  auto resp = [&](double t) {
    const Metric7 gt = metric_from_phi(p + t * hat);
    double s = 0;
    for (int a = 0; a < 49; ++a) s += (gt.g[a] - g.g[a]) * (gt.g[a] - g.g[a]);
    return std::sqrt(s) / t;
  };
  const double q1 = resp(0.01), q2 = resp(0.005), q3 = resp(0.0025);
  CHECK(std::abs(q2 / q3 - 1.0) < 0.05);
  CHECK(std::abs(q1 / q2 - 1.0) < 0.05);
}
