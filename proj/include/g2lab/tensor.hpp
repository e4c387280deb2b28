#pragma once
// Dense component storage for tensors on a 7-dimensional space. A rank-k
// tensor is a flat vector of 7^k entries, row-major in its indices.
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "g2lab/jet.hpp"

namespace g2lab {

inline constexpr int kDim = 7;

constexpr std::size_t pow7(int k) {
  std::size_t p = 1;
  for (int i = 0; i < k; ++i) p *= kDim;
  return p;
}

template <class S>
using Dense = std::vector<S>;

template <class S>
using Mat7 = std::array<S, 49>;

inline constexpr int idx2(int i, int j) { return i * 7 + j; }
inline constexpr int idx3(int i, int j, int k) { return (i * 7 + j) * 7 + k; }
inline constexpr int idx4(int i, int j, int k, int l) { return ((i * 7 + j) * 7 + k) * 7 + l; }

inline int rank_of(std::size_t n) {
  int k = 0;
  std::size_t p = 1;
  while (p < n) {
    p *= kDim;
    ++k;
  }
  if (p != n) throw std::invalid_argument("size is not a power of 7");
  return k;
}

// Raise index slot `slot` of a rank-k tensor with the inverse metric.
template <class S>
Dense<S> raise_slot(const Dense<S>& t, int rank, int slot, const Mat7<S>& ginv) {
  const std::size_t inner = pow7(rank - slot - 1);
  const std::size_t outer = pow7(slot);
  Dense<S> r(t.size(), S(0.0));
  for (std::size_t o = 0; o < outer; ++o)
    for (int a = 0; a < 7; ++a)
      for (int b = 0; b < 7; ++b) {
        const S& gab = ginv[idx2(a, b)];
        if (is_zero(gab)) continue;
        const std::size_t src = (o * 7 + b) * inner;
        const std::size_t dst = (o * 7 + a) * inner;
        for (std::size_t i = 0; i < inner; ++i) r[dst + i] += gab * t[src + i];
      }
  return r;
}

template <class S>
Dense<S> raise_all(const Dense<S>& t, const Mat7<S>& ginv) {
  const int k = rank_of(t.size());
  Dense<S> r = t;
  for (int s = 0; s < k; ++s) r = raise_slot(r, k, s, ginv);
  return r;
}

template <class S>
S contract(const Dense<S>& a, const Dense<S>& b) {
  S s(0.0);
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Full tensor norm squared, all indices covariant on input.
template <class S>
S norm2(const Dense<S>& t, const Mat7<S>& ginv) {
  return contract(t, raise_all(t, ginv));
}

// Norm squared of a quantity evaluated only at the base point.
template <class S>
double norm2_value(const Dense<S>& t, const Mat7<S>& ginv) {
  Dense<double> tv(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) tv[i] = value(t[i]);
  Mat7<double> gv;
  for (int i = 0; i < 49; ++i) gv[i] = value(ginv[i]);
  return norm2(tv, gv);
}

template <class To, class From>
Dense<To> lower_all(const Dense<From>& t) {
  Dense<To> r(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) r[i] = lower<To>(t[i]);
  return r;
}
template <class To, class From>
Mat7<To> lower_all(const Mat7<From>& t) {
  Mat7<To> r;
  for (std::size_t i = 0; i < t.size(); ++i) r[i] = lower<To>(t[i]);
  return r;
}

template <class S>
Dense<double> values(const Dense<S>& t) {
  Dense<double> r(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) r[i] = value(t[i]);
  return r;
}

inline double max_abs(const Dense<double>& t) {
  double m = 0.0;
  for (double x : t) m = std::max(m, std::abs(x));
  return m;
}

// Gaussian elimination with partial pivoting on the base-point values.
template <class S>
S det7(Mat7<S> a) {
  S d(1.0);
  for (int c = 0; c < 7; ++c) {
    int p = c;
    for (int r = c + 1; r < 7; ++r)
      if (std::abs(value(a[idx2(r, c)])) > std::abs(value(a[idx2(p, c)]))) p = r;
    if (value(a[idx2(p, c)]) == 0.0) return S(0.0);
    if (p != c) {
      for (int k = 0; k < 7; ++k) std::swap(a[idx2(p, k)], a[idx2(c, k)]);
      d = -d;
    }
    d = d * a[idx2(c, c)];
    for (int r = c + 1; r < 7; ++r) {
      if (is_zero(a[idx2(r, c)])) continue;
      S f = a[idx2(r, c)] / a[idx2(c, c)];
      for (int k = c; k < 7; ++k) a[idx2(r, k)] -= f * a[idx2(c, k)];
    }
  }
  return d;
}

template <class S>
Mat7<S> inverse7(Mat7<S> a) {
  Mat7<S> inv;
  for (int i = 0; i < 49; ++i) inv[i] = S(0.0);
  for (int i = 0; i < 7; ++i) inv[idx2(i, i)] = S(1.0);
  for (int c = 0; c < 7; ++c) {
    int p = c;
    for (int r = c + 1; r < 7; ++r)
      if (std::abs(value(a[idx2(r, c)])) > std::abs(value(a[idx2(p, c)]))) p = r;
    if (value(a[idx2(p, c)]) == 0.0) throw std::domain_error("singular 7x7 matrix");
    if (p != c)
      for (int k = 0; k < 7; ++k) {
        std::swap(a[idx2(p, k)], a[idx2(c, k)]);
        std::swap(inv[idx2(p, k)], inv[idx2(c, k)]);
      }
    S piv = S(1.0) / a[idx2(c, c)];
    for (int k = 0; k < 7; ++k) {
      a[idx2(c, k)] = a[idx2(c, k)] * piv;
      inv[idx2(c, k)] = inv[idx2(c, k)] * piv;
    }
    for (int r = 0; r < 7; ++r) {
      if (r == c || is_zero(a[idx2(r, c)])) continue;
      S f = a[idx2(r, c)];
      for (int k = 0; k < 7; ++k) {
        a[idx2(r, k)] -= f * a[idx2(c, k)];
        inv[idx2(r, k)] -= f * inv[idx2(c, k)];
      }
    }
  }
  return inv;
}

// Smallest eigenvalue of the symmetric part of a 7x7 matrix.
double min_eigenvalue7(const Mat7<double>& m);

}  // namespace g2lab
