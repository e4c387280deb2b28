#pragma once
// Invariant coframes on the 6-dimensional link of a cohomogeneity-one
// geometry. The full frame has index 0 = radial (E_0 = d/dr) and 1..6 = link.
// Brackets [E_i, E_j] = C^k_ij E_k, equivalently dtheta^k = -1/2 C^k_ij theta^ij.
// Homogeneous links G/H carry the isotropy part of the bracket too, which
// enters the curvature through ad([X_i, X_j]_h) acting on m.
#include <array>
#include <string>
#include <vector>

#include "g2lab/tensor.hpp"

namespace g2lab {

struct LinkSpec {
  std::string name;
  std::array<double, 343> C{};  // C^k_ij at idx3(i, j, k)
  bool has_isotropy = false;
  std::vector<Mat7<double>> iso;  // 49 pairs (i, j); matrix entry (p, k)

  double c(int i, int j, int k) const { return C[idx3(i, j, k)]; }
  const Mat7<double>& iso_at(int i, int j) const { return iso[idx2(i, j)]; }

  // Max |C^k_ij + C^k_ji| and Jacobi residual of the bracket on the link
  // (on the full isotropy algebra for homogeneous links).
  double antisymmetry_residual() const;
  double jacobi_residual() const;

  static LinkSpec round_s6();
  static LinkSpec iwasawa();
  // SU(2) x SU(2) with left-invariant frame, [E_i, E_j] = eps_ijk E_k in each factor.
  static LinkSpec su2xsu2();
  // Flat link: all brackets vanish.
  static LinkSpec torus();
};

// Nearly Kaehler SU(3)-structure on a link: the cone
// phi_C = r^2 dr ^ omega + r^3 ReOmega is torsion-free, with d omega = 3 ReOmega.
struct ConeData {
  LinkSpec link;
  Dense<double> metric;   // 49, link metric (index 0 rows unused)
  Dense<double> omega;    // 49, link indices only
  Dense<double> reomega;  // 343, link indices only

  static const ConeData& s6();
  // Homogeneous nearly Kaehler S3 x S3 = SU(2)^3 / diag, written as a
  // left-invariant structure on SU(2) x SU(2).
  static const ConeData& s3xs3();
};

// phi0 restricted to the link splits as omega = phi0(e0, ., .) and ReOmega.
// For the round S6 link dtheta is such that d omega = 3 ReOmega.
struct S6Algebra {
  std::vector<std::array<double, 49>> g2_basis;  // 14 matrices in so(7)
  std::array<std::array<double, 49>, 7> m_basis;  // X_1..X_6 (index 0 unused)
  double jacobi = 0.0;
};
const S6Algebra& s6_algebra();

}  // namespace g2lab
