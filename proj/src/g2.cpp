#include "g2lab/g2.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "g2lab/parallel.hpp"

namespace g2lab {

const std::vector<WedgeSplit>& metric_splits() {
  static const std::vector<WedgeSplit> splits = [] {
    std::vector<WedgeSplit> out;
    for (const auto& ab : combinations(2))
      for (const auto& cd : combinations(2)) {
        if (ab.mask() & cd.mask()) continue;
        const unsigned rest = 127u & ~(ab.mask() | cd.mask());
        int efg[3], n = 0;
        for (int b = 0; b < 7; ++b)
          if (rest & (1u << b)) efg[n++] = b;
        int p[7] = {ab.i[0], ab.i[1], cd.i[0], cd.i[1], efg[0], efg[1], efg[2]};
        out.push_back({p[0], p[1], p[2], p[3], p[4], p[5], p[6], permutation_sign(p, 7)});
      }
    return out;
  }();
  return splits;
}

namespace {

int sort_with_sign(std::array<int, 7>& v, int k) {
  int s = 1;
  for (int a = 0; a < k; ++a)
    for (int b = 0; b + 1 < k - a; ++b)
      if (v[b] > v[b + 1]) {
        std::swap(v[b], v[b + 1]);
        s = -s;
      }
  for (int a = 0; a + 1 < k; ++a)
    if (v[a] == v[a + 1]) return 0;
  return s;
}

MultiIndex make_index(const std::array<int, 7>& v, int k) {
  MultiIndex mi;
  mi.k = k;
  mi.i = v;
  return mi;
}

double gen_norm2(const Mat7<double>& t, const Mat7<double>& ginv) {
  Dense<double> d(t.begin(), t.end());
  return norm2(d, ginv);
}

Mat7<double> lower_both(const Mat7<double>& up, const Mat7<double>& g) {
  Mat7<double> r{};
  for (int a = 0; a < 7; ++a)
    for (int b = 0; b < 7; ++b) {
      double s = 0.0;
      for (int c = 0; c < 7; ++c)
        for (int d = 0; d < 7; ++d) s += g[idx2(a, c)] * up[idx2(c, d)] * g[idx2(d, b)];
      r[idx2(a, b)] = s;
    }
  return r;
}

}  // namespace

double& AltForm::at(std::initializer_list<int> idx) {
  std::array<int, 7> v{};
  int n = 0;
  for (int x : idx) v[n++] = x;
  if (n != k || sort_with_sign(v, k) != 1) throw std::invalid_argument("AltForm::at expects increasing indices");
  return c[combination_rank(make_index(v, k))];
}

double AltForm::get(std::initializer_list<int> idx) const {
  std::array<int, 7> v{};
  int n = 0;
  for (int x : idx) v[n++] = x;
  if (n != k) throw std::invalid_argument("AltForm::get degree mismatch");
  const int s = sort_with_sign(v, k);
  if (s == 0) return 0.0;
  return s * c[combination_rank(make_index(v, k))];
}

Dense<double> AltForm::dense() const {
  Dense<double> t(pow7(k), 0.0);
  const auto& cs = combinations(k);
  for (std::size_t r = 0; r < cs.size(); ++r)
    if (c[r] != 0.0) set_antisym(t, cs[r], c[r]);
  return t;
}

AltForm AltForm::from_dense(const Dense<double>& t) {
  AltForm a(rank_of(t.size()));
  const auto& cs = combinations(a.k);
  for (std::size_t r = 0; r < cs.size(); ++r) a.c[r] = get_at(t, cs[r]);
  return a;
}

AltForm& AltForm::operator+=(const AltForm& o) {
  if (o.k != k) throw std::invalid_argument("AltForm degree mismatch");
  for (std::size_t r = 0; r < c.size(); ++r) c[r] += o.c[r];
  return *this;
}
AltForm& AltForm::operator-=(const AltForm& o) {
  if (o.k != k) throw std::invalid_argument("AltForm degree mismatch");
  for (std::size_t r = 0; r < c.size(); ++r) c[r] -= o.c[r];
  return *this;
}
AltForm& AltForm::operator*=(double s) {
  for (double& x : c) x *= s;
  return *this;
}

Metric7 Metric7::identity() {
  Metric7 m;
  for (int i = 0; i < 7; ++i) m.g[idx2(i, i)] = m.ginv[idx2(i, i)] = 1.0;
  return m;
}

Metric7 Metric7::from_matrix(const Mat7<double>& g, int orientation) {
  Metric7 m;
  m.g = g;
  m.ginv = inverse7(g);
  const double d = det7(g);
  if (!(d > 0.0)) throw DegenerateForm("metric is not positive-definite");
  m.vol = std::sqrt(d);
  m.orientation = orientation;
  return m;
}

Sym2 Sym2::from_matrix(const Mat7<double>& m) {
  Sym2 s;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) s.h[idx2(i, j)] = 0.5 * (m[idx2(i, j)] + m[idx2(j, i)]);
  return s;
}

ThreeForm standard_phi() { return AltForm::from_dense(standard_phi_dense<double>()); }

Metric7 metric_from_phi(const ThreeForm& phi) {
  if (phi.k != 3) throw std::invalid_argument("metric_from_phi expects a 3-form");
  auto im = metric_from_phi_dense(phi.dense());
  Metric7 m;
  m.g = im.g;
  m.ginv = im.ginv;
  m.vol = im.vol;
  m.orientation = im.orientation;
  return m;
}

bool is_nondegenerate(const ThreeForm& phi) {
  try {
    metric_from_phi(phi);
    return true;
  } catch (const DegenerateForm&) {
    return false;
  }
}

AltForm hodge_star(const Metric7& g, const AltForm& a) {
  return AltForm::from_dense(hodge_dense(a.dense(), g.ginv, g.vol, g.orientation));
}

double form_inner(const Metric7& g, const AltForm& a, const AltForm& b) {
  if (a.k != b.k) throw std::invalid_argument("form_inner degree mismatch");
  double f = 1.0;
  for (int i = 2; i <= a.k; ++i) f *= i;
  return contract(a.dense(), raise_form(b.dense(), g.ginv)) / f;
}

double form_norm2(const Metric7& g, const AltForm& a) { return form_inner(g, a, a); }

AltForm wedge(const AltForm& a, const AltForm& b) {
  AltForm out(a.k + b.k);
  if (a.k + b.k > 7) return AltForm(7);
  const auto& big = combinations(a.k + b.k);
  const auto& sub = combinations(a.k);
  for (std::size_t r = 0; r < big.size(); ++r) {
    const unsigned m = big[r].mask();
    double s = 0.0;
    for (const auto& A : sub) {
      if ((A.mask() & m) != A.mask()) continue;
      const unsigned bm = m & ~A.mask();
      MultiIndex B;
      B.k = b.k;
      int n = 0;
      for (int x = 0; x < 7; ++x)
        if (bm & (1u << x)) B.i[n++] = x;
      const double va = a.c[combination_rank(A)];
      if (va == 0.0) continue;
      const double vb = b.c[combination_rank_mask(bm)];
      if (vb == 0.0) continue;
      s += merge_sign(A, B) * va * vb;
    }
    out.c[r] = s;
  }
  return out;
}

AltForm one_form(const std::array<double, 7>& v) {
  AltForm a(1);
  for (int i = 0; i < 7; ++i) a.c[i] = v[i];
  return a;
}

IrrepDecomp3 decompose_three_form(const AltForm& gamma, const ThreeForm& phi) {
  const Metric7 g = metric_from_phi(phi);
  const AltForm psi = hodge_star(g, phi);
  IrrepDecomp3 d;
  d.b0 = form_inner(g, gamma, phi) / 21.0;
  const Dense<double> up = raise_all(gamma.dense(), g.ginv);
  const Dense<double> psid = psi.dense();
  for (int l = 0; l < 7; ++l) {
    double s = 0.0;
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 7; ++j)
        for (int k = 0; k < 7; ++k) s += up[idx3(i, j, k)] * psid[idx4(i, j, k, l)];
    d.b1[l] = s / 24.0;
  }
  const AltForm seven = hodge_star(g, wedge(one_form(d.b1), phi));
  d.b3 = gamma - 3.0 * d.b0 * phi - seven;
  double n1 = 0.0;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) n1 += d.b1[i] * g.ginv[idx2(i, j)] * d.b1[j];
  d.b1_norm2 = n1;
  d.b3_norm2 = form_norm2(g, d.b3);
  return d;
}

AltForm reconstruct(const IrrepDecomp3& d, const ThreeForm& phi) {
  const Metric7 g = metric_from_phi(phi);
  return 3.0 * d.b0 * phi + hodge_star(g, wedge(one_form(d.b1), phi)) + d.b3;
}

AltForm i_phi(const ThreeForm& phi, const Sym2& h) {
  const Metric7 g = metric_from_phi(phi);
  return AltForm::from_dense(i_phi_dense(phi.dense(), h.h, g.ginv));
}

double volume_second_order_expansion(const IrrepDecomp3& d) {
  return 1.0 + 7.0 * d.b0 + 14.0 * d.b0 * d.b0 + (2.0 / 3.0) * d.b1_norm2 - d.b3_norm2 / 6.0;
}

double volume_ratio(const ThreeForm& phi, const AltForm& gamma) {
  return metric_from_phi(phi + gamma).vol / metric_from_phi(phi).vol;
}

double contraction_identity_error(const ThreeForm& phi) {
  const Metric7 g = metric_from_phi(phi);
  const Dense<double> p = phi.dense();
  const Dense<double> up = raise_slot(raise_slot(p, 3, 0, g.ginv), 3, 1, g.ginv);
  double scale = 0.0;
  for (double x : g.g) scale = std::max(scale, std::abs(x));
  double err = 0.0;
  for (int k = 0; k < 7; ++k)
    for (int l = 0; l < 7; ++l) {
      double s = 0.0;
      for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) s += up[idx3(i, j, k)] * p[idx3(i, j, l)];
      err = std::max(err, std::abs(s - 6.0 * g.g[idx2(k, l)]) / (6.0 * scale));
    }
  return err;
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ull + index + 0x632BE59BD9B4E019ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

AltForm random_unit_form(int k, const Metric7& g, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  AltForm a(k);
  for (double& x : a.c) x = nd(rng);
  a *= 1.0 / std::sqrt(form_norm2(g, a));
  return a;
}

struct SampleOut {
  bool ok = false;
  bool skip = false;
  double metric = 0.0, inverse = 0.0, hodge = 0.0;
};

}  // namespace

BoundReport perturbation_bound_sampler(const ThreeForm& phi, double eps, std::size_t n, std::uint64_t seed) {
  const Metric7 g = metric_from_phi(phi);
  constexpr int kMaxTries = 64;
  std::vector<SampleOut> out(n);
  std::vector<int> rejects(n, 0);
  parallel_for(n, [&](std::size_t i) {
    std::mt19937_64 rng(stream_seed(seed, i));
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    for (int attempt = 0; attempt < kMaxTries; ++attempt) {
      AltForm gamma = random_unit_form(3, g, rng);
      const double t = eps * (1.0 - ud(rng));  // (0, eps]
      gamma *= t;
      const int kb = 1 + int(i % 6);
      const AltForm beta = random_unit_form(kb, g, rng);
      Metric7 gt;
      try {
        gt = metric_from_phi(phi + gamma);
      } catch (const DegenerateForm&) {
        ++rejects[i];
        continue;
      }
      SampleOut s;
      s.ok = true;
      if (t < 1e-14) {
        s.skip = true;
        out[i] = s;
        return;
      }
      Mat7<double> dg, dinv;
      for (int a = 0; a < 49; ++a) {
        dg[a] = gt.g[a] - g.g[a];
        dinv[a] = gt.ginv[a] - g.ginv[a];
      }
      s.metric = std::sqrt(gen_norm2(dg, g.ginv)) / t;
      const double ninv = std::sqrt(gen_norm2(lower_both(gt.ginv, g.g), g.ginv));
      s.inverse = std::sqrt(gen_norm2(lower_both(dinv, g.g), g.ginv)) / (ninv * t);
      const AltForm d = hodge_star(g, beta) - hodge_star(gt, beta);
      s.hodge = std::sqrt(form_norm2(g, d)) / t;
      out[i] = s;
      return;
    }
  });
  BoundReport r;
  r.eps = eps;
  for (std::size_t i = 0; i < n; ++i) {
    r.rejected += std::size_t(rejects[i]);
    if (!out[i].ok) throw SamplingExhausted("no nondegenerate perturbation found for sample " + std::to_string(i));
    if (out[i].skip) continue;
    ++r.samples;
    r.sup_metric = std::max(r.sup_metric, out[i].metric);
    r.sup_inverse = std::max(r.sup_inverse, out[i].inverse);
    r.sup_hodge = std::max(r.sup_hodge, out[i].hodge);
  }
  return r;
}

double measure_i_phi_constant(std::size_t n, std::uint64_t seed) {
  const ThreeForm phi = standard_phi();
  const Metric7 g = Metric7::identity();
  double sum = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    std::mt19937_64 rng(stream_seed(seed, s));
    std::normal_distribution<double> nd(0.0, 1.0);
    Mat7<double> m;
    for (double& x : m) x = nd(rng);
    Sym2 h = Sym2::from_matrix(m);
    double tr = 0.0;
    for (int i = 0; i < 7; ++i) tr += h.h[idx2(i, i)];
    for (int i = 0; i < 7; ++i) h.h[idx2(i, i)] -= tr / 7.0;
    double hn = 0.0;
    for (double x : h.h) hn += x * x;
    sum += form_norm2(g, i_phi(phi, h)) / hn;
  }
  return sum / double(n);
}

}  // namespace g2lab
