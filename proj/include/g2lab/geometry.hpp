#pragma once
// Riemannian geometry of a cohomogeneity-one frame at a single radial node.
//
// Components are taken in the invariant coframe (dr, theta^1..theta^6) and are
// jets in r. Only E_0 = d/dr differentiates components; the link directions
// act through the structure constants. Each derivative consumes one jet order,
// so the scalar types track how many exact radial derivatives remain.
#include <utility>
#include <vector>

#include "g2lab/g2core.hpp"
#include "g2lab/jet.hpp"
#include "g2lab/link.hpp"
#include "g2lab/tensor.hpp"

namespace g2lab {

template <int N>
using J = Jet<N, double>;

// Gamma^k_ij (nabla_{E_i} E_j = Gamma^k_ij E_k) stored at idx3(i, j, k).
template <class S>
struct SparseGamma {
  std::array<std::vector<std::pair<int, S>>, 49> by_ij;  // (i, j) -> [(k, Gamma^k_ij)]
};

template <class To, class From>
SparseGamma<To> sparse_gamma(const Dense<From>& G) {
  SparseGamma<To> sg;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      for (int k = 0; k < 7; ++k) {
        const From& x = G[idx3(i, j, k)];
        if (!is_zero(x)) sg.by_ij[idx2(i, j)].push_back({k, lower<To>(x)});
      }
  return sg;
}

template <int M>
J<M - 1> d_dr(const J<M>& x) {
  return derivative(x);
}

// (nabla_i K)_{j1..jk} = E_i K_{j..} - sum_s Gamma^m_{i j_s} K_{..m..}.
template <int M>
Dense<J<M - 1>> cov_deriv(const Dense<J<M>>& K, const SparseGamma<J<M - 1>>& sg) {
  static_assert(M >= 1);
  const int k = rank_of(K.size());
  const std::size_t n = K.size();
  Dense<J<M - 1>> out(n * 7, J<M - 1>(0.0));
  std::vector<std::size_t> stride(k);
  for (int s = 0; s < k; ++s) stride[s] = pow7(k - 1 - s);
  for (std::size_t off = 0; off < n; ++off) out[off] = derivative(K[off]);
  std::vector<J<M - 1>> low(n);
  for (std::size_t off = 0; off < n; ++off) low[off] = truncate<M - 1>(K[off]);
  for (int i = 0; i < 7; ++i) {
    J<M - 1>* o = &out[std::size_t(i) * n];
    for (std::size_t off = 0; off < n; ++off) {
      for (int s = 0; s < k; ++s) {
        const int js = int((off / stride[s]) % 7);
        const auto& lst = sg.by_ij[idx2(i, js)];
        if (lst.empty()) continue;
        const std::size_t base = off - std::size_t(js) * stride[s];
        for (const auto& [m, gm] : lst) {
          const J<M - 1>& v = low[base + std::size_t(m) * stride[s]];
          if (!is_zero(v)) o[off] -= gm * v;
        }
      }
    }
  }
  return out;
}

// Rough Laplacian g^pq nabla_p nabla_q K without forming the rank-(k+2) tensor.
template <int M>
Dense<J<M - 2>> rough_laplacian(const Dense<J<M>>& K, const SparseGamma<J<M - 1>>& sg1,
                                const SparseGamma<J<M - 2>>& sg2, const Mat7<J<M - 1>>& ginv) {
  static_assert(M >= 2);
  const int k = rank_of(K.size());
  const std::size_t n = K.size();
  Dense<J<M - 1>> U = raise_slot(cov_deriv<M>(K, sg1), k + 1, 0, ginv);
  Dense<J<M - 2>> out(n, J<M - 2>(0.0));
  std::vector<std::size_t> stride(k);
  for (int s = 0; s < k; ++s) stride[s] = pow7(k - 1 - s);
  for (std::size_t off = 0; off < n; ++off) out[off] = derivative(U[off]);  // p = 0
  std::vector<J<M - 2>> low(U.size());
  for (std::size_t a = 0; a < U.size(); ++a) low[a] = truncate<M - 2>(U[a]);
  // + Gamma^p_{pm} U^m
  for (int p = 0; p < 7; ++p)
    for (int m = 0; m < 7; ++m)
      for (const auto& [kk, gm] : sg2.by_ij[idx2(p, m)]) {
        if (kk != p) continue;
        const J<M - 2>* u = &low[std::size_t(m) * n];
        for (std::size_t off = 0; off < n; ++off)
          if (!is_zero(u[off])) out[off] += gm * u[off];
      }
  // - Gamma^m_{p j_s} U^p_{..m..}
  for (int p = 0; p < 7; ++p) {
    const J<M - 2>* u = &low[std::size_t(p) * n];
    for (std::size_t off = 0; off < n; ++off)
      for (int s = 0; s < k; ++s) {
        const int js = int((off / stride[s]) % 7);
        const auto& lst = sg2.by_ij[idx2(p, js)];
        const std::size_t base = off - std::size_t(js) * stride[s];
        for (const auto& [m, gm] : lst) {
          const J<M - 2>& v = u[base + std::size_t(m) * stride[s]];
          if (!is_zero(v)) out[off] -= gm * v;
        }
      }
  }
  return out;
}

// Koszul formula in the invariant frame.
template <int N>
Dense<J<N - 1>> christoffel(const Mat7<J<N>>& g, const Mat7<J<N>>& ginv, const LinkSpec& L) {
  Mat7<J<N - 1>> dg, gl, giv;
  for (int a = 0; a < 49; ++a) {
    dg[a] = derivative(g[a]);
    gl[a] = truncate<N - 1>(g[a]);
    giv[a] = truncate<N - 1>(ginv[a]);
  }
  // Cg[i][j][k] = g([E_i, E_j], E_k) = C^m_ij g_mk
  Dense<J<N - 1>> Cg(343, J<N - 1>(0.0));
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      for (int m = 0; m < 7; ++m) {
        const double c = L.c(i, j, m);
        if (c == 0.0) continue;
        for (int k = 0; k < 7; ++k) Cg[idx3(i, j, k)] += c * gl[idx2(m, k)];
      }
  Dense<J<N - 1>> low(343, J<N - 1>(0.0));  // Gamma_{k i j} at idx3(i, j, k)
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      for (int k = 0; k < 7; ++k) {
        J<N - 1> s(0.0);
        if (i == 0) s += dg[idx2(j, k)];
        if (j == 0) s += dg[idx2(i, k)];
        if (k == 0) s -= dg[idx2(i, j)];
        s += Cg[idx3(i, j, k)] - Cg[idx3(i, k, j)] - Cg[idx3(j, k, i)];
        low[idx3(i, j, k)] = s * 0.5;
      }
  Dense<J<N - 1>> G(343, J<N - 1>(0.0));
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      for (int p = 0; p < 7; ++p) {
        J<N - 1> s(0.0);
        for (int k = 0; k < 7; ++k)
          if (!is_zero(giv[idx2(p, k)]) && !is_zero(low[idx3(i, j, k)])) s += giv[idx2(p, k)] * low[idx3(i, j, k)];
        G[idx3(i, j, p)] = s;
      }
  return G;
}

// R(E_i, E_j) E_k = R^p_{kij} E_p, returned lowered as Rm_{ijkl} = g(R(E_i,E_j)E_k, E_l).
template <int M>
Dense<J<M - 1>> riemann(const Dense<J<M>>& G, const Mat7<J<M>>& g, const LinkSpec& L) {
  Dense<J<M - 1>> Gl(343);
  for (int a = 0; a < 343; ++a) Gl[a] = truncate<M - 1>(G[a]);
  // up[i][j][k][p] = R^p_{kij}
  Dense<J<M - 1>> up(2401, J<M - 1>(0.0));
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      if (i == j) continue;
      for (int k = 0; k < 7; ++k)
        for (int p = 0; p < 7; ++p) {
          J<M - 1> s(0.0);
          if (i == 0) s += derivative(G[idx3(j, k, p)]);
          if (j == 0) s -= derivative(G[idx3(i, k, p)]);
          for (int l = 0; l < 7; ++l) {
            s += Gl[idx3(j, k, l)] * Gl[idx3(i, l, p)];
            s -= Gl[idx3(i, k, l)] * Gl[idx3(j, l, p)];
          }
          for (int m = 0; m < 7; ++m) {
            const double c = L.c(i, j, m);
            if (c != 0.0) s -= c * Gl[idx3(m, k, p)];
          }
          if (L.has_isotropy) {
            const double z = L.iso_at(i, j)[idx2(p, k)];
            if (z != 0.0) s -= z;
          }
          up[idx4(i, j, k, p)] = s;
        }
    }
  Dense<J<M - 1>> low(2401, J<M - 1>(0.0));
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      for (int k = 0; k < 7; ++k)
        for (int l = 0; l < 7; ++l) {
          J<M - 1> s(0.0);
          for (int p = 0; p < 7; ++p) {
            const J<M - 1>& v = up[idx4(i, j, k, p)];
            if (!is_zero(v)) s += v * truncate<M - 1>(g[idx2(p, l)]);
          }
          low[idx4(i, j, k, l)] = s;
        }
  return low;
}

// Ric_jk = tr(X -> R(X, E_j) E_k) = g^{il} Rm_{ijkl}.
template <class S>
Mat7<S> ricci(const Dense<S>& Rm, const Mat7<S>& ginv) {
  Mat7<S> ric;
  for (int j = 0; j < 7; ++j)
    for (int k = 0; k < 7; ++k) {
      S s(0.0);
      for (int i = 0; i < 7; ++i)
        for (int l = 0; l < 7; ++l)
          if (!is_zero(ginv[idx2(i, l)])) s += ginv[idx2(i, l)] * Rm[idx4(i, j, k, l)];
      ric[idx2(j, k)] = s;
    }
  return ric;
}

template <class S>
S trace(const Mat7<S>& a, const Mat7<S>& ginv) {
  S s(0.0);
  for (int i = 0; i < 49; ++i)
    if (!is_zero(ginv[i])) s += ginv[i] * a[i];
  return s;
}

// Exterior derivative of a dense k-form in the invariant coframe.
template <int M>
Dense<J<M - 1>> ext_deriv(const Dense<J<M>>& a, const LinkSpec& L) {
  const int k = rank_of(a.size());
  Dense<J<M - 1>> out(pow7(k + 1), J<M - 1>(0.0));
  auto comp = [&](const int* idx, int len) -> J<M - 1> {
    std::size_t off = 0;
    for (int q = 0; q < len; ++q) off = off * 7 + idx[q];
    return truncate<M - 1>(a[off]);
  };
  for (const auto& I : combinations(k + 1)) {
    J<M - 1> s(0.0);
    int rest[7];
    for (int p = 0; p <= k; ++p) {
      if (I.i[p] != 0) continue;
      int n = 0;
      for (int q = 0; q <= k; ++q)
        if (q != p) rest[n++] = I.i[q];
      std::size_t off = 0;
      for (int q = 0; q < k; ++q) off = off * 7 + rest[q];
      J<M - 1> d = derivative(a[off]);
      if (p % 2)
        s -= d;
      else
        s += d;
    }
    for (int p = 0; p <= k; ++p)
      for (int q = p + 1; q <= k; ++q)
        for (int m = 0; m < 7; ++m) {
          const double c = L.c(I.i[p], I.i[q], m);
          if (c == 0.0) continue;
          int idx[7];
          idx[0] = m;
          int n = 1;
          for (int r = 0; r <= k; ++r)
            if (r != p && r != q) idx[n++] = I.i[r];
          const double sg = ((p + q) % 2) ? -1.0 : 1.0;
          s += comp(idx, k) * (sg * c);
        }
    if (!is_zero(s)) set_antisym(out, I, s);
  }
  return out;
}

// Interior product of a vector (upper index) into the first slot.
template <class S>
Dense<S> interior(const std::array<S, 7>& X, const Dense<S>& a) {
  const std::size_t n = a.size() / 7;
  Dense<S> out(n, S(0.0));
  for (int m = 0; m < 7; ++m) {
    if (is_zero(X[m])) continue;
    for (std::size_t o = 0; o < n; ++o) out[o] += X[m] * a[std::size_t(m) * n + o];
  }
  return out;
}

// Full metric norm squared of a covariant tensor evaluated at the node.
template <class S, class G>
double tnorm2(const Dense<S>& t, const Mat7<G>& ginv) {
  return norm2_value(t, ginv);
}

// Torsion T_ij of a closed structure: T_i^j = (1/24) nabla_i phi_lmn psi^{jlmn}.
template <int M>
Dense<J<M - 1>> torsion(const Dense<J<M - 1>>& nabla_phi, const Dense<J<M>>& psi, const Mat7<J<M>>& g,
                        const Mat7<J<M>>& ginv) {
  Mat7<J<M - 1>> giv;
  for (int a = 0; a < 49; ++a) giv[a] = truncate<M - 1>(ginv[a]);
  Dense<J<M - 1>> psil(psi.size());
  for (std::size_t a = 0; a < psi.size(); ++a) psil[a] = truncate<M - 1>(psi[a]);
  const Dense<J<M - 1>> psiu = raise_all(psil, giv);
  Mat7<J<M - 1>> mixed;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      J<M - 1> s(0.0);
      for (std::size_t r = 0; r < 343; ++r) {
        const J<M - 1>& a = nabla_phi[std::size_t(i) * 343 + r];
        if (is_zero(a)) continue;
        const J<M - 1>& b = psiu[std::size_t(j) * 343 + r];
        if (!is_zero(b)) s += a * b;
      }
      mixed[idx2(i, j)] = s * (1.0 / 24.0);
    }
  Dense<J<M - 1>> T(49, J<M - 1>(0.0));
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      J<M - 1> s(0.0);
      for (int m = 0; m < 7; ++m) s += mixed[idx2(i, m)] * truncate<M - 1>(g[idx2(m, j)]);
      T[idx2(i, j)] = s;
    }
  return T;
}

// h = -Ric - 1/3 |T|^2 g - 2 T o T with (T o T)_ij = T_i^k T_kj.
template <class S>
Mat7<S> flow_h(const Mat7<S>& ric, const Dense<S>& T, const Mat7<S>& g, const Mat7<S>& ginv) {
  Dense<S> Tup = raise_slot(T, 2, 1, ginv);  // T_i^k
  Dense<S> Tuu = raise_slot(Tup, 2, 0, ginv);
  S t2(0.0);
  for (int a = 0; a < 49; ++a) t2 += Tuu[a] * T[a];
  Mat7<S> h;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) {
      S tt(0.0);
      for (int k = 0; k < 7; ++k) tt += Tup[idx2(i, k)] * T[idx2(k, j)];
      h[idx2(i, j)] = -ric[idx2(i, j)] - t2 * g[idx2(i, j)] * (1.0 / 3.0) - tt * 2.0;
    }
  return h;
}

template <class S>
S torsion_norm2(const Dense<S>& T, const Mat7<S>& ginv) {
  return contract(T, raise_all(T, ginv));
}

template <class To, class From>
Mat7<To> truncate_mat(const Mat7<From>& a) {
  Mat7<To> r;
  for (int i = 0; i < 49; ++i) r[i] = lower<To>(a[i]);
  return r;
}
template <class To, class From>
Dense<To> truncate_dense(const Dense<From>& a) {
  Dense<To> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = lower<To>(a[i]);
  return r;
}

// Everything a closed G2-structure determines at one node from an order-N jet of phi.
template <int N>
struct NodeGeometry {
  static_assert(N >= 2);
  Dense<J<N>> phi;
  InducedMetric<J<N>> met;
  Dense<J<N>> psi;
  Dense<J<N - 1>> gamma;  // Gamma^k_ij at idx3(i, j, k)
  SparseGamma<J<N - 1>> sg1;
  SparseGamma<J<N - 2>> sg2;
  Dense<J<N - 2>> Rm;
  Mat7<J<N - 2>> Ric;
  J<N - 2> R;
  Dense<J<N - 1>> nabla_phi;
  Dense<J<N - 1>> T;
  Mat7<J<N - 2>> h;
};

template <int N>
NodeGeometry<N> node_geometry(const Dense<J<N>>& phi, const LinkSpec& L) {
  NodeGeometry<N> G;
  G.phi = phi;
  G.met = metric_from_phi_dense(phi);
  G.psi = hodge_dense(phi, G.met.ginv, G.met.vol, G.met.orientation);
  G.gamma = christoffel<N>(G.met.g, G.met.ginv, L);
  G.sg1 = sparse_gamma<J<N - 1>>(G.gamma);
  G.sg2 = sparse_gamma<J<N - 2>>(G.gamma);
  Mat7<J<N - 1>> g1 = truncate_mat<J<N - 1>>(G.met.g);
  G.Rm = riemann<N - 1>(G.gamma, g1, L);
  Mat7<J<N - 2>> gi2 = truncate_mat<J<N - 2>>(G.met.ginv), g2 = truncate_mat<J<N - 2>>(G.met.g);
  G.Ric = ricci(G.Rm, gi2);
  G.R = trace(G.Ric, gi2);
  G.nabla_phi = cov_deriv<N>(phi, sparse_gamma<J<N - 1>>(G.gamma));
  G.T = torsion<N>(G.nabla_phi, G.psi, G.met.g, G.met.ginv);
  G.h = flow_h(G.Ric, truncate_dense<J<N - 2>>(G.T), g2, gi2);
  return G;
}

}  // namespace g2lab
