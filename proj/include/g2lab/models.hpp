#pragma once
// Explicit cohomogeneity-one G2-structures. Every model is a function of the
// radial coordinate x evaluated at a jet argument, so radial derivatives are
// exact. Components live in the invariant coframe (dx, theta^1..theta^6).
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "g2lab/geometry.hpp"
#include "g2lab/link.hpp"

namespace g2lab {

struct SyntheticParams {
  double decay_rate = 2.0;
  double amplitude = 0.0;
  double r_cut = 2.0;  // chi(r) = 1 / (1 + (r_cut / r)^8)
  std::uint64_t seed = 0;
  const ConeData* cone = nullptr;
  // Derived from the seed: link 2-forms beta_j, their d, and profile coefficients.
  std::vector<Dense<double>> beta, dbeta;
  std::vector<double> a, w, psi;
};
// The perturbation is d(sum_j u_j(r) beta_j) with
// u_j = amplitude r^(3 - decay_rate) chi(r) (1 + a_j cos(w_j log r + psi_j)).
// Over S6 the only invariant choice is beta = omega; over S3 x S3 the beta_j are
// random left-invariant 2-forms.
SyntheticParams make_synthetic_params(const ConeData& cone, double decay_rate, double amplitude, std::uint64_t seed,
                                      double r_cut = 2.0);

enum class ModelKind { flat_cone, fowdar, synthetic_ac };

struct ModelSpec {
  ModelKind kind = ModelKind::flat_cone;
  double phi_scale = 1.0;  // phi -> c phi
  double f_coef = 0.25;    // cone models: f = f_coef r^2
  SyntheticParams syn;

  const LinkSpec& link() const;
  std::string name() const;
};

// phi_C = A dr ^ omega + B ReOmega for an SU(3)-structure on the link.
template <class S>
Dense<S> cone_type_phi(const ConeData& cd, const S& A, const S& B) {
  Dense<S> p(343, S(0.0));
  for (const auto& I : combinations(3)) {
    double v;
    if (I.i[0] == 0) {
      v = cd.omega[idx2(I.i[1], I.i[2])];
      if (v != 0.0) set_antisym(p, I, A * v);
    } else {
      v = cd.reomega[idx3(I.i[0], I.i[1], I.i[2])];
      if (v != 0.0) set_antisym(p, I, B * v);
    }
  }
  return p;
}

template <class S>
S synthetic_profile(const S& r, const SyntheticParams& sp, std::size_t j) {
  using std::cos;
  using std::log;
  using std::pow;
  const S chi = 1.0 / (1.0 + pow(r, -8.0) * std::pow(sp.r_cut, 8.0));
  return pow(r, 3.0 - sp.decay_rate) * chi * (1.0 + cos(log(r) * sp.w[j] + sp.psi[j]) * sp.a[j]) * sp.amplitude;
}

template <int N>
struct ModelJets {
  Dense<J<N>> phi;
  J<N> f;
};

// Evaluate the model at a jet argument x (x may be a composed map, which
// gives pullbacks by radial diffeomorphisms for free).
template <int N>
ModelJets<N> model_at(const ModelSpec& m, const J<N>& x) {
  ModelJets<N> out;
  const double c = m.phi_scale;
  switch (m.kind) {
    case ModelKind::flat_cone: {
      out.phi = cone_type_phi<J<N>>(ConeData::s6(), x * x * c, x * x * x * c);
      out.f = x * x * m.f_coef;
      break;
    }
    case ModelKind::synthetic_ac: {
      const SyntheticParams& sp = m.syn;
      out.phi = cone_type_phi<J<N>>(*sp.cone, x * x * c, x * x * x * c);
      using D = Jet<1, J<N>>;  // u and u' through a nested first-order jet
      const D xr = D::variable(x);
      for (std::size_t j = 0; j < sp.beta.size(); ++j) {
        if (sp.amplitude == 0.0) break;
        const D u = synthetic_profile(xr, sp, j);
        const J<N> u0 = u.c[0] * c, u1 = u.c[1] * c;
        for (int a = 1; a < 7; ++a)
          for (int b = 1; b < 7; ++b) {
            const double v = sp.beta[j][idx2(a, b)];
            if (v != 0.0) out.phi[idx3(0, a, b)] += u1 * v;
            if (v != 0.0) out.phi[idx3(a, 0, b)] -= u1 * v;
            if (v != 0.0) out.phi[idx3(a, b, 0)] += u1 * v;
          }
        for (int q = 0; q < 343; ++q) {
          const double v = sp.dbeta[j][q];
          if (v != 0.0) out.phi[q] += u0 * v;
        }
      }
      out.f = x * x * m.f_coef;
      break;
    }
    case ModelKind::fowdar: {
      const J<N> e6 = exp(x * (1.0 / 6.0)), e3 = e6 * e6;
      Dense<J<N>> p(343, J<N>(0.0));
      auto put = [&](int a, int b, int d, const J<N>& v) {
        MultiIndex mi;
        mi.k = 3;
        mi.i = {a, b, d};
        set_antisym(p, mi, v * c);
      };
      const J<N> s3 = e6 * std::sqrt(3.0);
      put(0, 1, 2, s3);
      put(0, 3, 4, s3);
      put(0, 5, 6, e3 * (1.0 / 3.0));
      put(1, 4, 5, e3);
      put(2, 3, 5, e3);
      put(1, 3, 6, e3);
      put(2, 4, 6, -e3);
      out.phi = p;
      out.f = x * 2.5;
      break;
    }
  }
  return out;
}

template <int N>
ModelJets<N> model_at(const ModelSpec& m, double x) {
  return model_at<N>(m, J<N>::variable(x));
}

}  // namespace g2lab
