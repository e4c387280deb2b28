#include "g2lab/build.hpp"

#include <algorithm>
#include <cmath>

#include "g2lab/parallel.hpp"

namespace g2lab {

TensorField sample_phi(const ModelSpec& m, const RadialGrid& grid) {
  TensorField f(m.name(), m.link().name, grid, 3, Symmetry::antisymmetric);
  const auto x = grid.nodes();
  for (int i = 0; i < grid.n; ++i) {
    const auto phi = model_at<0>(m, x[i]).phi;
    Dense<double> v(343);
    for (int a = 0; a < 343; ++a) v[a] = value(phi[a]);
    try {
      metric_from_phi_dense(v);
    } catch (const DegenerateForm& e) {
      throw DegenerateForm(std::string(e.what()) + " at node " + std::to_string(i));
    }
    f.values[i] = v;  // components are exactly antisymmetric already
  }
  return f;
}

TensorField sample_potential(const ModelSpec& m, const RadialGrid& grid) {
  TensorField f(m.name(), m.link().name, grid, 0, Symmetry::none);
  const auto x = grid.nodes();
  for (int i = 0; i < grid.n; ++i) f.values[i][0] = value(model_at<0>(m, x[i]).f);
  return f;
}

ModelSpec flat_cone_model() {
  ModelSpec m;
  m.kind = ModelKind::flat_cone;
  return m;
}

ModelSpec fowdar_model() {
  ModelSpec m;
  m.kind = ModelKind::fowdar;
  return m;
}

ModelSpec synthetic_model(const ConeData& cone, double decay_rate, double amplitude, std::uint64_t seed) {
  ModelSpec m;
  m.kind = ModelKind::synthetic_ac;
  m.syn = make_synthetic_params(cone, decay_rate, amplitude, seed);
  return m;
}

ShrinkerData build_flat_cone(const RadialGrid& grid) {
  if (grid.t_min <= 0.0) throw std::invalid_argument("flat cone needs t_min > 0");
  ShrinkerData s;
  s.model = flat_cone_model();
  s.phi = sample_phi(s.model, grid);
  s.f = sample_potential(s.model, grid);
  s.lambda = -1.5;
  return s;
}

ShrinkerData build_fowdar(const RadialGrid& grid) {
  ShrinkerData s;
  s.model = fowdar_model();
  s.phi = sample_phi(s.model, grid);
  s.f = sample_potential(s.model, grid);
  s.lambda = -0.5;
  return s;
}

TensorField build_synthetic_ac(const RadialGrid& grid, const ConeData& cone, double decay_rate, double amplitude,
                               std::uint64_t seed) {
  return sample_phi(synthetic_model(cone, decay_rate, amplitude, seed), grid);
}

TensorField metric_field(const TensorField& phi) {
  TensorField g(phi.model, phi.link, phi.grid, 2, Symmetry::symmetric);
  for (int i = 0; i < phi.grid.n; ++i) {
    const auto met = metric_from_phi_dense(phi.values[i]);
    g.set(i, Dense<double>(met.g.begin(), met.g.end()));
  }
  return g;
}

CurvatureData curvature(const TensorField& g, const LinkSpec& link, int accuracy) {
  if (g.rank != 2) throw std::invalid_argument("curvature: metric must be rank 2");
  const StencilSet st = make_stencils(g.grid, 2, accuracy);
  CurvatureData cd;
  cd.christoffel = TensorField(g.model, g.link, g.grid, 3, Symmetry::none);
  cd.riemann = TensorField(g.model, g.link, g.grid, 4, Symmetry::none);
  cd.ricci = TensorField(g.model, g.link, g.grid, 2, Symmetry::symmetric);
  cd.scalar = TensorField(g.model, g.link, g.grid, 0, Symmetry::none);
  for (int i = 0; i < g.grid.n; ++i) {
    Mat7<double> gv;
    std::copy(g.values[i].begin(), g.values[i].end(), gv.begin());
    if (!(min_eigenvalue7(gv) > 0.0)) throw SingularMetric("metric not positive-definite at node " + std::to_string(i));
  }
  parallel_for(std::size_t(g.grid.n), [&](std::size_t i) {
    const auto gj = nodal_jets<2>(g, st, int(i));
    Mat7<J<2>> gm;
    std::copy(gj.begin(), gj.end(), gm.begin());
    const Mat7<J<2>> gi = inverse7(gm);
    const auto G = christoffel<2>(gm, gi, link);
    const auto Rm = riemann<1>(G, truncate_mat<J<1>>(gm), link);
    const auto gi0 = truncate_mat<J<0>>(gi);
    const auto Ric = ricci(Rm, gi0);
    cd.christoffel.values[i] = values(truncate_dense<J<0>>(G));
    cd.riemann.values[i] = values(Rm);
    cd.ricci.values[i] = values(Dense<J<0>>(Ric.begin(), Ric.end()));
    cd.scalar.values[i][0] = value(trace(Ric, gi0));
  });
  return cd;
}

double RiemannSymmetry::max() const { return std::max({antisym_first, antisym_second, pair_exchange, bianchi}); }

RiemannSymmetry riemann_symmetry(const Dense<double>& Rm) {
  RiemannSymmetry r;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      for (int k = 0; k < 7; ++k)
        for (int l = 0; l < 7; ++l) {
          const double v = Rm[idx4(i, j, k, l)];
          r.antisym_first = std::max(r.antisym_first, std::abs(v + Rm[idx4(j, i, k, l)]));
          r.antisym_second = std::max(r.antisym_second, std::abs(v + Rm[idx4(i, j, l, k)]));
          r.pair_exchange = std::max(r.pair_exchange, std::abs(v - Rm[idx4(k, l, i, j)]));
          r.bianchi = std::max(r.bianchi, std::abs(v + Rm[idx4(j, k, i, l)] + Rm[idx4(k, i, j, l)]));
        }
  return r;
}

}  // namespace g2lab
