#include "g2lab/models.hpp"

#include <random>

#include "g2lab/g2.hpp"

namespace g2lab {

SyntheticParams make_synthetic_params(const ConeData& cone, double decay_rate, double amplitude, std::uint64_t seed,
                                      double r_cut) {
  SyntheticParams sp;
  sp.decay_rate = decay_rate;
  sp.amplitude = amplitude;
  sp.r_cut = r_cut;
  sp.seed = seed;
  sp.cone = &cone;
  std::mt19937_64 rng(stream_seed(seed, 0x5A));
  std::uniform_real_distribution<double> ua(-0.3, 0.3), uw(0.5, 2.0), up(0.0, 6.283185307179586);
  std::normal_distribution<double> nd(0.0, 1.0);
  const bool isotropic = cone.link.has_isotropy;
  const int terms = isotropic ? 1 : 2;
  Mat7<double> gi{};
  {
    Mat7<double> gm{};
    for (int a = 0; a < 49; ++a) gm[a] = cone.metric[a];
    gm[0] = 1.0;
    gi = inverse7(gm);
  }
  for (int j = 0; j < terms; ++j) {
    Dense<double> b(49, 0.0);
    if (isotropic) {
      b = cone.omega;
    } else {
      for (int a = 1; a < 7; ++a)
        for (int c = a + 1; c < 7; ++c) {
          const double v = nd(rng);
          b[idx2(a, c)] = v;
          b[idx2(c, a)] = -v;
        }
      const double n = std::sqrt(norm2(b, gi) / 2.0);
      for (double& v : b) v /= n;
    }
    Dense<J<1>> bj(49);
    for (int a = 0; a < 49; ++a) bj[a] = J<1>(b[a]);
    const auto db = ext_deriv<1>(bj, cone.link);
    Dense<double> dbv(343);
    for (int a = 0; a < 343; ++a) dbv[a] = value(db[a]);
    sp.beta.push_back(b);
    sp.dbeta.push_back(dbv);
    sp.a.push_back(ua(rng));
    sp.w.push_back(uw(rng));
    sp.psi.push_back(up(rng));
  }
  return sp;
}

const LinkSpec& ModelSpec::link() const {
  static const LinkSpec iw = LinkSpec::iwasawa();
  if (kind == ModelKind::fowdar) return iw;
  if (kind == ModelKind::synthetic_ac && syn.cone) return syn.cone->link;
  return ConeData::s6().link;
}

std::string ModelSpec::name() const {
  switch (kind) {
    case ModelKind::flat_cone: return "flat_cone";
    case ModelKind::fowdar: return "fowdar";
    case ModelKind::synthetic_ac: return "synthetic_ac";
  }
  return "unknown";
}

}  // namespace g2lab
