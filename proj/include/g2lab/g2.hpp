#pragma once
// Pointwise G2 linear algebra on one 7-dimensional tangent space.
//
// Indices run over 0..6 (index 0 is the radial/time direction in the model
// geometries). phi0 = e012 + e034 + e056 + e135 - e146 - e236 - e245, which is
// the usual 123 + 145 + 167 + 246 - 257 - 347 - 356 after shifting by one.
// Form norms carry the 1/k! factor, so |phi0|^2 = 7.
#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "g2lab/combinatorics.hpp"
#include "g2lab/g2core.hpp"
#include "g2lab/tensor.hpp"

namespace g2lab {

struct SamplingExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// k-form stored on strictly increasing multi-indices, in combinations(k) order.
struct AltForm {
  int k = 0;
  std::vector<double> c;

  AltForm() = default;
  explicit AltForm(int degree) : k(degree), c(std::size_t(binomial(7, degree)), 0.0) {}

  double& operator[](std::size_t r) { return c[r]; }
  double operator[](std::size_t r) const { return c[r]; }
  double& at(std::initializer_list<int> idx);
  // Component with arbitrary (possibly unsorted) indices, antisymmetry applied.
  double get(std::initializer_list<int> idx) const;

  Dense<double> dense() const;
  static AltForm from_dense(const Dense<double>& t);

  AltForm& operator+=(const AltForm& o);
  AltForm& operator-=(const AltForm& o);
  AltForm& operator*=(double s);
  friend AltForm operator+(AltForm a, const AltForm& b) { return a += b; }
  friend AltForm operator-(AltForm a, const AltForm& b) { return a -= b; }
  friend AltForm operator*(double s, AltForm a) { return a *= s; }
  friend AltForm operator*(AltForm a, double s) { return a *= s; }
};

using ThreeForm = AltForm;

struct Metric7 {
  Mat7<double> g{};
  Mat7<double> ginv{};
  double vol = 1.0;
  int orientation = 1;

  static Metric7 identity();
  static Metric7 from_matrix(const Mat7<double>& g, int orientation = 1);
};

struct Sym2 {
  Mat7<double> h{};
  static Sym2 from_matrix(const Mat7<double>& m);  // symmetrizes
};

struct IrrepDecomp3 {
  double b0 = 0.0;
  std::array<double, 7> b1{};
  AltForm b3{3};
  // Squared norms in the metric of phi, needed by the volume expansion.
  double b1_norm2 = 0.0;
  double b3_norm2 = 0.0;
};

ThreeForm standard_phi();
bool is_nondegenerate(const ThreeForm& phi);
Metric7 metric_from_phi(const ThreeForm& phi);

AltForm hodge_star(const Metric7& g, const AltForm& a);
double form_inner(const Metric7& g, const AltForm& a, const AltForm& b);
double form_norm2(const Metric7& g, const AltForm& a);
AltForm wedge(const AltForm& a, const AltForm& b);
AltForm one_form(const std::array<double, 7>& v);

IrrepDecomp3 decompose_three_form(const AltForm& gamma, const ThreeForm& phi);
AltForm reconstruct(const IrrepDecomp3& d, const ThreeForm& phi);

AltForm i_phi(const ThreeForm& phi, const Sym2& h);

// Model of Vol(phi + gamma) / Vol(phi) through second order in gamma.
double volume_second_order_expansion(const IrrepDecomp3& d);
double volume_ratio(const ThreeForm& phi, const AltForm& gamma);

// Max relative error of phi_ijk phi_abl g^ia g^jb = 6 g_kl.
double contraction_identity_error(const ThreeForm& phi);

struct BoundReport {
  double eps = 0.0;
  std::size_t samples = 0;
  std::size_t rejected = 0;
  double sup_metric = 0.0;   // |g~ - g| / |gamma|
  double sup_inverse = 0.0;  // |g~^-1 - g^-1| / (|g~^-1| |gamma|)
  double sup_hodge = 0.0;    // |*beta - *~beta| / (|gamma| |beta|)
};

// Random gamma with |gamma|_phi <= eps. Sample i draws from its own stream
// derived from (seed, i), so results do not depend on scheduling.
BoundReport perturbation_bound_sampler(const ThreeForm& phi, double eps, std::size_t n, std::uint64_t seed);

// Ratio |i_phi(h)|^2 / |h|^2 for random traceless h at phi0.
double measure_i_phi_constant(std::size_t n, std::uint64_t seed);

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace g2lab
