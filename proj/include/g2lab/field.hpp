#pragma once
// Radial grids, finite-difference stencils and nodal tensor fields.
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "g2lab/geometry.hpp"

namespace g2lab {

enum class Spacing { uniform, log };

struct RadialGrid {
  double t_min = 1.0, t_max = 2.0;
  int n = 9;
  Spacing spacing = Spacing::uniform;

  RadialGrid() = default;
  RadialGrid(double a, double b, int count, Spacing s = Spacing::uniform);
  double node(int i) const;
  std::vector<double> nodes() const;
  double min_spacing() const;
};

// Fornberg weights w[m][q] for derivatives 0..max_order at x0 from points xs.
std::vector<std::vector<double>> fornberg_weights(double x0, const std::vector<double>& xs, int max_order);

// Stencils for derivatives 0..order at every node; central where possible,
// shifted one-sided near the ends. accuracy is the target truncation order.
struct StencilSet {
  int order = 2;
  int accuracy = 4;
  std::vector<int> first;                          // first node index of each stencil
  std::vector<std::vector<std::vector<double>>> w;  // [node][m][q]
  int width(int node) const { return int(w[node][0].size()); }
  int half_width = 0;  // nodes closer than this to an end use shifted stencils
};
StencilSet make_stencils(const RadialGrid& grid, int order, int accuracy);

enum class Symmetry { none, symmetric, antisymmetric };

struct ChartMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TensorField {
  std::string model;
  std::string link;
  RadialGrid grid;
  int rank = 0;
  Symmetry symmetry = Symmetry::none;
  std::vector<Dense<double>> values;  // per node, 7^rank components

  TensorField() = default;
  TensorField(std::string model_name, std::string link_name, const RadialGrid& g, int rank, Symmetry s);
  // Writes enforce the declared symmetry by (anti)symmetrization.
  void set(int node, const Dense<double>& v);
  const Dense<double>& at(int node) const { return values[node]; }
};

// Self-describing text snapshot; doubles are hex floats so round trips are bit-exact.
void write_snapshot(std::ostream& os, const TensorField& f);
TensorField read_snapshot(std::istream& is);
void save_snapshot(const std::string& path, const TensorField& f);
TensorField load_snapshot(const std::string& path);

// Order-N jets of every component at a node from stencil weights.
template <int N>
Dense<J<N>> nodal_jets(const TensorField& f, const StencilSet& st, int node) {
  const std::size_t nc = f.values[node].size();
  Dense<J<N>> out(nc, J<N>(0.0));
  const int w = st.width(node), a = st.first[node];
  double fact = 1.0;
  for (int m = 0; m <= N; ++m) {
    if (m > 0) fact *= m;
    const auto& wm = st.w[node][m];
    for (std::size_t c = 0; c < nc; ++c) {
      double s = 0.0;
      for (int q = 0; q < w; ++q) s += wm[q] * f.values[a + q][c];
      out[c].c[m] = (m == 0 ? f.values[node][c] : s / fact);
    }
  }
  return out;
}

}  // namespace g2lab
