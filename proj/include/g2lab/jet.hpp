#pragma once
// Truncated Taylor jets. c[k] holds f^(k)(x0)/k!. The coefficient type may itself
// be a jet, which gives rectangular multivariate truncation.
#include <array>
#include <cmath>
#include <type_traits>

namespace g2lab {

template <int N, class T = double>
struct Jet {
  static_assert(N >= 0);
  static constexpr int order = N;
  using coeff_type = T;
  std::array<T, N + 1> c{};

  Jet() { c.fill(T(0.0)); }
  Jet(double v) {  // NOLINT(google-explicit-constructor)
    c.fill(T(0.0));
    c[0] = T(v);
  }
  template <class U = T, class = std::enable_if_t<!std::is_same_v<U, double>>>
  Jet(const T& v) {  // NOLINT(google-explicit-constructor)
    c.fill(T(0.0));
    c[0] = v;
  }

  static Jet variable(const T& x0) {
    Jet j(x0);
    if constexpr (N >= 1) j.c[1] = T(1.0);
    return j;
  }

  Jet& operator+=(const Jet& o) {
    for (int k = 0; k <= N; ++k) c[k] += o.c[k];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int k = 0; k <= N; ++k) c[k] -= o.c[k];
    return *this;
  }
  Jet& operator*=(double s) {
    for (int k = 0; k <= N; ++k) c[k] *= s;
    return *this;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }

  friend Jet operator-(const Jet& a) {
    Jet r;
    for (int k = 0; k <= N; ++k) r.c[k] = -a.c[k];
    return r;
  }
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator+(Jet a, double s) {
    a.c[0] += T(s);
    return a;
  }
  friend Jet operator+(double s, Jet a) { return a + s; }
  friend Jet operator-(Jet a, double s) {
    a.c[0] -= T(s);
    return a;
  }
  friend Jet operator-(double s, const Jet& a) { return (-a) + s; }
  friend Jet operator/(Jet a, double s) { return a *= (1.0 / s); }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (int k = 0; k <= N; ++k) {
      T s = a.c[0] * b.c[k];
      for (int j = 1; j <= k; ++j) s += a.c[j] * b.c[k - j];
      r.c[k] = s;
    }
    return r;
  }
  friend Jet operator/(const Jet& a, const Jet& b) {
    Jet r;
    for (int k = 0; k <= N; ++k) {
      T s = a.c[k];
      for (int j = 1; j <= k; ++j) s -= b.c[j] * r.c[k - j];
      r.c[k] = s / b.c[0];
    }
    return r;
  }
  friend Jet operator/(double s, const Jet& b) { return Jet(s) / b; }
};

template <class S>
struct is_jet : std::false_type {};
template <int N, class T>
struct is_jet<Jet<N, T>> : std::true_type {};

inline double value(double x) { return x; }
template <int N, class T>
double value(const Jet<N, T>& j) {
  return value(j.c[0]);
}

inline bool is_zero(double x) { return x == 0.0; }
template <int N, class T>
bool is_zero(const Jet<N, T>& j) {
  for (const auto& x : j.c)
    if (!is_zero(x)) return false;
  return true;
}

template <int N, class T>
Jet<N, T> exp(const Jet<N, T>& a) {
  using std::exp;
  Jet<N, T> r;
  r.c[0] = exp(a.c[0]);
  for (int k = 1; k <= N; ++k) {
    T s = T(0.0);
    for (int j = 1; j <= k; ++j) s += (a.c[j] * r.c[k - j]) * double(j);
    r.c[k] = s * (1.0 / k);
  }
  return r;
}

template <int N, class T>
Jet<N, T> log(const Jet<N, T>& a) {
  using std::log;
  Jet<N, T> r;
  r.c[0] = log(a.c[0]);
  for (int k = 1; k <= N; ++k) {
    T s = T(0.0);
    for (int j = 1; j < k; ++j) s += (r.c[j] * a.c[k - j]) * double(j);
    r.c[k] = (a.c[k] - s * (1.0 / k)) / a.c[0];
  }
  return r;
}

template <int N, class T>
Jet<N, T> pow(const Jet<N, T>& a, double p) {
  using std::pow;
  Jet<N, T> r;
  r.c[0] = pow(a.c[0], p);
  for (int k = 1; k <= N; ++k) {
    T s = T(0.0);
    for (int j = 1; j <= k; ++j) s += (a.c[j] * r.c[k - j]) * ((p + 1.0) * j - k);
    r.c[k] = s / (a.c[0] * double(k));
  }
  return r;
}

template <int N, class T>
Jet<N, T> sqrt(const Jet<N, T>& a) {
  return pow(a, 0.5);
}

template <int N, class T>
void sincos(const Jet<N, T>& a, Jet<N, T>& s, Jet<N, T>& c) {
  using std::cos;
  using std::sin;
  s.c[0] = sin(a.c[0]);
  c.c[0] = cos(a.c[0]);
  for (int k = 1; k <= N; ++k) {
    T ss = T(0.0), cc = T(0.0);
    for (int j = 1; j <= k; ++j) {
      ss += (a.c[j] * c.c[k - j]) * double(j);
      cc += (a.c[j] * s.c[k - j]) * double(j);
    }
    s.c[k] = ss * (1.0 / k);
    c.c[k] = cc * (-1.0 / k);
  }
}
template <int N, class T>
Jet<N, T> sin(const Jet<N, T>& a) {
  Jet<N, T> s, c;
  sincos(a, s, c);
  return s;
}
template <int N, class T>
Jet<N, T> cos(const Jet<N, T>& a) {
  Jet<N, T> s, c;
  sincos(a, s, c);
  return c;
}

// d/dx, losing one order.
template <int N, class T>
Jet<N - 1, T> derivative(const Jet<N, T>& a) {
  Jet<N - 1, T> r;
  for (int k = 0; k < N; ++k) r.c[k] = a.c[k + 1] * double(k + 1);
  return r;
}

template <int M, int N, class T>
Jet<M, T> truncate(const Jet<N, T>& a) {
  static_assert(M <= N);
  Jet<M, T> r;
  for (int k = 0; k <= M; ++k) r.c[k] = a.c[k];
  return r;
}

// k-th derivative at the expansion point.
template <int N, class T>
T deriv_at(const Jet<N, T>& a, int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return a.c[k] * f;
}

// Truncation helpers that also accept plain doubles, so templated code can
// lower the order of any scalar uniformly.
template <class To>
To lower(double x) {
  return To(x);
}
template <class To, int N, class T>
To lower(const Jet<N, T>& a) {
  if constexpr (std::is_same_v<To, double>) {
    return value(a);
  } else {
    return truncate<To::order>(a);
  }
}

template <class S>
struct jet_order {
  static constexpr int value = 0;
};
template <int N, class T>
struct jet_order<Jet<N, T>> {
  static constexpr int value = N;
};

// Jet<N-1> for N >= 1; a derivative of a double is not defined.
template <class S>
struct lower_jet;
template <int N>
struct lower_jet<Jet<N, double>> {
  using type = Jet<N - 1, double>;
};

}  // namespace g2lab
