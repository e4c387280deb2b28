#include <cmath>

#include "g2lab/geometry.hpp"
#include "g2lab/link.hpp"

namespace g2lab {

LinkSpec LinkSpec::su2xsu2() {
  LinkSpec L;
  L.name = "SU2xSU2";
  for (int blk = 0; blk < 2; ++blk)
    for (int i = 0; i < 3; ++i) {
      const int j = (i + 1) % 3, k = (i + 2) % 3;
      const int o = 1 + 3 * blk;
      L.C[idx3(o + i, o + j, o + k)] = 1.0;
      L.C[idx3(o + j, o + i, o + k)] = -1.0;
    }
  return L;
}

namespace {

ConeData build_s6() {
  ConeData c;
  c.link = LinkSpec::round_s6();
  const Dense<double> p0 = standard_phi_dense<double>();
  c.metric.assign(49, 0.0);
  c.omega.assign(49, 0.0);
  c.reomega.assign(343, 0.0);
  for (int a = 1; a < 7; ++a) {
    c.metric[idx2(a, a)] = 1.0;
    for (int b = 1; b < 7; ++b) {
      c.omega[idx2(a, b)] = p0[idx3(0, a, b)];
      for (int d = 1; d < 7; ++d) c.reomega[idx3(a, b, d)] = p0[idx3(a, b, d)];
    }
  }
  return c;
}

ConeData build_s3xs3() {
  ConeData c;
  c.link = LinkSpec::su2xsu2();
  // Tangent vector of E_a at the base coset of SU(2)^3 / diag, as an element
  // (X1, X2, X3) of m = {X1 + X2 + X3 = 0}.
  std::array<std::array<double, 9>, 7> mv{};
  for (int i = 0; i < 3; ++i) {
    for (int blk = 0; blk < 3; ++blk) {
      mv[1 + i][3 * blk + i] = blk == 0 ? 2.0 / 3.0 : -1.0 / 3.0;
      mv[4 + i][3 * blk + i] = blk == 1 ? 2.0 / 3.0 : -1.0 / 3.0;
    }
  }
  auto B = [](const std::array<double, 9>& x, const std::array<double, 9>& y) {
    double s = 0.0;
    for (int q = 0; q < 9; ++q) s += x[q] * y[q];
    return s;
  };
  // J = (2 sigma + 1) / sqrt 3 for the cyclic 3-symmetry sigma(X1, X2, X3) = (X2, X3, X1).
  auto Jop = [](const std::array<double, 9>& x) {
    std::array<double, 9> y{};
    for (int blk = 0; blk < 3; ++blk)
      for (int i = 0; i < 3; ++i) y[3 * blk + i] = (2.0 * x[3 * ((blk + 1) % 3) + i] + x[3 * blk + i]) / std::sqrt(3.0);
    return y;
  };
  Dense<double> g(49, 0.0), w(49, 0.0);
  for (int a = 1; a < 7; ++a)
    for (int b = 1; b < 7; ++b) {
      g[idx2(a, b)] = B(mv[a], mv[b]);
      w[idx2(a, b)] = B(Jop(mv[a]), mv[b]);
    }
  Dense<J<1>> wj(49);
  for (int a = 0; a < 49; ++a) wj[a] = J<1>(w[a]);
  const Dense<J<0>> dw = ext_deriv<1>(wj, c.link);
  // Rescale the metric by s^2 so that ReOmega = d omega / 3 has |ReOmega|^2 = 4.
  Mat7<double> gi{};
  {
    Mat7<double> gm{};
    for (int a = 0; a < 49; ++a) gm[a] = g[a];
    gm[0] = 1.0;
    gi = inverse7(gm);
    gi[0] = 0.0;
  }
  Dense<double> dw3(343);
  for (int a = 0; a < 343; ++a) dw3[a] = value(dw[a]) / 3.0;
  const double n2 = norm2(dw3, gi) / 6.0;
  const double s2 = n2 / 4.0;
  c.metric.assign(49, 0.0);
  c.omega.assign(49, 0.0);
  c.reomega.assign(343, 0.0);
  for (int a = 0; a < 49; ++a) {
    c.metric[a] = s2 * g[a];
    c.omega[a] = s2 * w[a];
  }
  for (int a = 0; a < 343; ++a) c.reomega[a] = s2 * dw3[a];
  return c;
}

}  // namespace

const ConeData& ConeData::s6() {
  static const ConeData c = build_s6();
  return c;
}

const ConeData& ConeData::s3xs3() {
  static const ConeData c = build_s3xs3();
  return c;
}

}  // namespace g2lab
