#pragma once
// Model fields on radial grids, and curvature of a tabulated metric.
#include <stdexcept>
#include <string>

#include "g2lab/field.hpp"
#include "g2lab/models.hpp"

namespace g2lab {

struct SingularMetric : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShrinkerData {
  ModelSpec model;
  TensorField phi;  // rank 3
  TensorField f;    // rank 0
  double lambda = -1.5;
};

// phi and f of a model sampled at the grid nodes. DegenerateForm names the node.
TensorField sample_phi(const ModelSpec& m, const RadialGrid& grid);
TensorField sample_potential(const ModelSpec& m, const RadialGrid& grid);

ModelSpec flat_cone_model();
ModelSpec fowdar_model();
ModelSpec synthetic_model(const ConeData& cone, double decay_rate, double amplitude, std::uint64_t seed);

ShrinkerData build_flat_cone(const RadialGrid& grid);
ShrinkerData build_fowdar(const RadialGrid& grid);
TensorField build_synthetic_ac(const RadialGrid& grid, const ConeData& cone, double decay_rate, double amplitude,
                               std::uint64_t seed);

struct CurvatureData {
  TensorField christoffel;  // rank 3, Gamma^k_ij at idx3(i, j, k)
  TensorField riemann;      // rank 4
  TensorField ricci;        // rank 2
  TensorField scalar;       // rank 0
};

// Curvature of a nodal metric: radial derivatives by finite differences,
// link derivatives through the structure constants.
CurvatureData curvature(const TensorField& g, const LinkSpec& link, int accuracy = 4);

// Metric field induced by a nodal phi.
TensorField metric_field(const TensorField& phi);

struct RiemannSymmetry {
  double antisym_first = 0.0;  // Rm_ijkl + Rm_jikl
  double antisym_second = 0.0;
  double pair_exchange = 0.0;
  double bianchi = 0.0;  // Rm_ijkl + Rm_jkil + Rm_kijl
  double max() const;
};
RiemannSymmetry riemann_symmetry(const Dense<double>& Rm);

// nabla^2 f_ij (derivative index first) of a scalar jet.
template <int M>
Mat7<J<M - 2>> hessian(const J<M>& f, const SparseGamma<J<M - 1>>& sg1, const SparseGamma<J<M - 2>>& sg2) {
  const Dense<J<M - 1>> df = cov_deriv<M>(Dense<J<M>>{f}, sg1);
  const Dense<J<M - 2>> ddf = cov_deriv<M - 1>(df, sg2);
  Mat7<J<M - 2>> H;
  for (int a = 0; a < 49; ++a) H[a] = ddf[a];
  return H;
}

// Analytic geometry of a model at one radius.
template <int N>
NodeGeometry<N> model_geometry(const ModelSpec& m, double x) {
  return node_geometry<N>(model_at<N>(m, x).phi, m.link());
}

}  // namespace g2lab
