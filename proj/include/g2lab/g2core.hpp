#pragma once
// Templated pointwise G2 algebra on dense component arrays. The scalar may be
// a double or a jet, so the same code yields values and radial derivatives.
#include <cmath>
#include <stdexcept>

#include "g2lab/combinatorics.hpp"
#include "g2lab/tensor.hpp"

namespace g2lab {

struct DegenerateForm : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Entries of the 7-form identity used in metric recovery: ordered splits of
// {0..6} into (a<b | c<d | e<f<g) with the permutation sign.
struct WedgeSplit {
  int a, b, c, d, e, f, g, sign;
};
const std::vector<WedgeSplit>& metric_splits();

// Fill every permutation of an increasing index set with the signed value.
template <class S>
void set_antisym(Dense<S>& t, const MultiIndex& mi, const S& v) {
  for (const auto& sp : permutations(mi.k)) {
    std::size_t off = 0;
    for (int a = 0; a < mi.k; ++a) off = off * 7 + mi.i[sp.p[a]];
    t[off] = sp.sign > 0 ? v : -v;
  }
}

template <class S>
S get_at(const Dense<S>& t, const MultiIndex& mi) {
  std::size_t off = 0;
  for (int a = 0; a < mi.k; ++a) off = off * 7 + mi.i[a];
  return t[off];
}

template <class S>
Dense<S> standard_phi_dense() {
  Dense<S> p(343, S(0.0));
  const int terms[7][4] = {{0, 1, 2, 1}, {0, 3, 4, 1}, {0, 5, 6, 1}, {1, 3, 5, 1},
                           {1, 4, 6, -1}, {2, 3, 6, -1}, {2, 4, 5, -1}};
  for (const auto& t : terms) {
    MultiIndex mi;
    mi.k = 3;
    mi.i = {t[0], t[1], t[2]};
    set_antisym(p, mi, S(double(t[3])));
  }
  return p;
}

template <class S>
struct InducedMetric {
  Mat7<S> g;
  Mat7<S> ginv;
  S vol;            // sqrt(det g), positive
  int orientation;  // sign of the e^0..6 coefficient of the volume form
};

template <class S>
Mat7<S> metric_numerator(const Dense<S>& phi) {
  Mat7<S> B;
  for (auto& x : B) x = S(0.0);
  const auto& splits = metric_splits();
  for (int i = 0; i < 7; ++i)
    for (int j = i; j < 7; ++j) {
      S s(0.0);
      for (const auto& w : splits) {
        const S& x = phi[idx3(i, w.a, w.b)];
        if (is_zero(x)) continue;
        const S& y = phi[idx3(j, w.c, w.d)];
        if (is_zero(y)) continue;
        const S& z = phi[idx3(w.e, w.f, w.g)];
        if (is_zero(z)) continue;
        S p = x * y * z;
        if (w.sign > 0)
          s += p;
        else
          s -= p;
      }
      B[idx2(i, j)] = s * (1.0 / 6.0);
      B[idx2(j, i)] = B[idx2(i, j)];
    }
  return B;
}

template <class S>
InducedMetric<S> metric_from_phi_dense(const Dense<S>& phi) {
  using std::abs;
  using std::pow;
  Mat7<S> B = metric_numerator(phi);
  S d = det7(B);
  const double dv = value(d);
  if (dv == 0.0 || !std::isfinite(dv)) throw DegenerateForm("metric recovery: det s = 0");
  InducedMetric<S> m;
  m.orientation = dv > 0 ? 1 : -1;
  S ad = dv > 0 ? d : -d;
  S scale = pow(ad, -1.0 / 9.0);
  if (m.orientation < 0) scale = -scale;
  for (int a = 0; a < 49; ++a) m.g[a] = B[a] * scale;
  Mat7<double> gv;
  for (int a = 0; a < 49; ++a) gv[a] = value(m.g[a]);
  if (!(min_eigenvalue7(gv) > 0.0)) throw DegenerateForm("metric recovery: not positive-definite");
  m.vol = pow(ad, 1.0 / 9.0);
  m.ginv = inverse7(m.g);
  return m;
}

// Raise all indices of a dense k-form: a^I = sum_J det(ginv[I, J]) a_J over
// increasing multi-indices. Much cheaper than raise_all for k >= 4.
template <class S>
Dense<S> raise_form(const Dense<S>& a, const Mat7<S>& ginv) {
  const int k = rank_of(a.size());
  Dense<S> out(a.size(), S(0.0));
  if (k == 0) return a;
  const auto& combs = combinations(k);
  const auto& perms = permutations(k);
  std::vector<S> low(combs.size());
  for (std::size_t q = 0; q < combs.size(); ++q) low[q] = get_at(a, combs[q]);
  for (const auto& I : combs) {
    S acc(0.0);
    for (std::size_t q = 0; q < combs.size(); ++q) {
      if (is_zero(low[q])) continue;
      const MultiIndex& Jm = combs[q];
      S det(0.0);
      for (const auto& sp : perms) {
        S prod(1.0);
        bool zero = false;
        for (int r = 0; r < k && !zero; ++r) {
          const S& e = ginv[idx2(I.i[r], Jm.i[sp.p[r]])];
          if (is_zero(e)) zero = true;
          else prod = r == 0 ? e : prod * e;
        }
        if (zero) continue;
        if (sp.sign > 0) det += prod;
        else det -= prod;
      }
      if (!is_zero(det)) acc += det * low[q];
    }
    if (!is_zero(acc)) set_antisym(out, I, acc);
  }
  return out;
}

// Hodge star of a dense k-form. Uses the signed volume orientation * vol.
template <class S>
Dense<S> hodge_dense(const Dense<S>& a, const Mat7<S>& ginv, const S& vol, int orientation) {
  const int k = rank_of(a.size());
  Dense<S> up = raise_form(a, ginv);
  Dense<S> out(pow7(7 - k), S(0.0));
  for (const auto& J : combinations(7 - k)) {
    const unsigned comp = 127u & ~J.mask();
    MultiIndex I;
    I.k = k;
    int n = 0;
    for (int b = 0; b < 7; ++b)
      if (comp & (1u << b)) I.i[n++] = b;
    S v = get_at(up, I);
    if (is_zero(v)) continue;
    const int s = merge_sign(I, J) * orientation;
    S w = v * vol;
    set_antisym(out, J, s > 0 ? w : -w);
  }
  return out;
}

// Form norm squared: (1/k!) a_I a^I = sum over increasing I.
template <class S>
S form_norm2(const Dense<S>& a, const Mat7<S>& ginv) {
  const int k = rank_of(a.size());
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return contract(a, raise_form(a, ginv)) * (1.0 / f);
}

// (b ^ alpha) for a one-form b and a dense k-form alpha.
template <class S>
Dense<S> wedge1(const Dense<S>& b, const Dense<S>& alpha) {
  const int k = rank_of(alpha.size());
  Dense<S> out(pow7(k + 1), S(0.0));
  for (const auto& I : combinations(k + 1)) {
    S s(0.0);
    for (int p = 0; p <= k; ++p) {
      MultiIndex rest;
      rest.k = k;
      int n = 0;
      for (int q = 0; q <= k; ++q)
        if (q != p) rest.i[n++] = I.i[q];
      S t = b[I.i[p]] * get_at(alpha, rest);
      if (p % 2)
        s -= t;
      else
        s += t;
    }
    if (!is_zero(s)) set_antisym(out, I, s);
  }
  return out;
}

// (i_phi h)_ijk = h_i^l phi_ljk + h_j^l phi_ilk + h_k^l phi_ijl.
template <class S>
Dense<S> i_phi_dense(const Dense<S>& phi, const Mat7<S>& h, const Mat7<S>& ginv) {
  Mat7<S> hm;  // h_i^l
  for (int i = 0; i < 7; ++i)
    for (int l = 0; l < 7; ++l) {
      S s(0.0);
      for (int m = 0; m < 7; ++m)
        if (!is_zero(ginv[idx2(m, l)])) s += h[idx2(i, m)] * ginv[idx2(m, l)];
      hm[idx2(i, l)] = s;
    }
  Dense<S> out(343, S(0.0));
  for (const auto& I : combinations(3)) {
    const int i = I.i[0], j = I.i[1], k = I.i[2];
    S s(0.0);
    for (int l = 0; l < 7; ++l) {
      if (!is_zero(hm[idx2(i, l)])) s += hm[idx2(i, l)] * phi[idx3(l, j, k)];
      if (!is_zero(hm[idx2(j, l)])) s += hm[idx2(j, l)] * phi[idx3(i, l, k)];
      if (!is_zero(hm[idx2(k, l)])) s += hm[idx2(k, l)] * phi[idx3(i, j, l)];
    }
    if (!is_zero(s)) set_antisym(out, I, s);
  }
  return out;
}

}  // namespace g2lab
