#include "g2lab/field.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "g2lab/combinatorics.hpp"

namespace g2lab {

RadialGrid::RadialGrid(double a, double b, int count, Spacing s) : t_min(a), t_max(b), n(count), spacing(s) {
  if (!(b > a)) throw std::invalid_argument("RadialGrid: t_max must exceed t_min");
  if (count < 9) throw std::invalid_argument("RadialGrid: at least 9 nodes required");
  if (s == Spacing::log && a <= 0.0) throw std::invalid_argument("RadialGrid: log spacing needs t_min > 0");
}

double RadialGrid::node(int i) const {
  const double u = double(i) / double(n - 1);
  if (i == n - 1) return t_max;
  if (spacing == Spacing::uniform) return t_min + (t_max - t_min) * u;
  return t_min * std::exp(u * std::log(t_max / t_min));
}

std::vector<double> RadialGrid::nodes() const {
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = node(i);
  return x;
}

double RadialGrid::min_spacing() const {
  double h = t_max - t_min;
  for (int i = 0; i + 1 < n; ++i) h = std::min(h, node(i + 1) - node(i));
  return h;
}

// Fornberg (1988) recursion.
std::vector<std::vector<double>> fornberg_weights(double x0, const std::vector<double>& xs, int max_order) {
  const int n = int(xs.size());
  std::vector<std::vector<double>> c(max_order + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0, c4 = xs[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, max_order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

StencilSet make_stencils(const RadialGrid& grid, int order, int accuracy) {
  StencilSet st;
  st.order = order;
  st.accuracy = accuracy;
  const int wc = 2 * ((order + accuracy - 1) / 2) + 1;
  const int wb = order + accuracy;
  if (wb > grid.n) throw std::invalid_argument("make_stencils: grid too small for the requested stencil");
  st.half_width = wc / 2;
  const auto x = grid.nodes();
  st.first.resize(grid.n);
  st.w.resize(grid.n);
  for (int i = 0; i < grid.n; ++i) {
    int a, w;
    if (i - st.half_width >= 0 && i + st.half_width < grid.n) {
      a = i - st.half_width;
      w = wc;
    } else {
      w = wb;
      a = std::clamp(i - w / 2, 0, grid.n - w);
    }
    std::vector<double> xs(x.begin() + a, x.begin() + a + w);
    st.first[i] = a;
    st.w[i] = fornberg_weights(x[i], xs, order);
  }
  return st;
}

TensorField::TensorField(std::string model_name, std::string link_name, const RadialGrid& g, int k, Symmetry s)
    : model(std::move(model_name)), link(std::move(link_name)), grid(g), rank(k), symmetry(s),
      values(g.n, Dense<double>(pow7(k), 0.0)) {}

namespace {

Dense<double> symmetrize(const Dense<double>& v, int k, bool anti) {
  const auto& perms = permutations(k);
  Dense<double> out(v.size(), 0.0);
  std::array<int, 7> idx{}, pidx{};
  for (std::size_t off = 0; off < v.size(); ++off) {
    std::size_t t = off;
    for (int s = k - 1; s >= 0; --s) {
      idx[s] = int(t % 7);
      t /= 7;
    }
    double acc = 0.0;
    for (const auto& p : perms) {
      for (int s = 0; s < k; ++s) pidx[s] = idx[p.p[s]];
      std::size_t o = 0;
      for (int s = 0; s < k; ++s) o = o * 7 + std::size_t(pidx[s]);
      acc += (anti ? p.sign : 1) * v[o];
    }
    out[off] = acc / double(perms.size());
  }
  return out;
}

const char* sym_name(Symmetry s) {
  switch (s) {
    case Symmetry::symmetric: return "symmetric";
    case Symmetry::antisymmetric: return "antisymmetric";
    default: return "none";
  }
}

std::string hex(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double parse_hex(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw std::runtime_error("snapshot: bad number '" + s + "'");
  return v;
}

std::string expect(std::istream& is, const std::string& key) {
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("snapshot: missing '" + key + "'");
  if (line.rfind(key + " ", 0) != 0 && line != key)
    throw std::runtime_error("snapshot: expected '" + key + "', got '" + line + "'");
  return line.size() > key.size() ? line.substr(key.size() + 1) : std::string();
}

}  // namespace

void TensorField::set(int node, const Dense<double>& v) {
  if (v.size() != pow7(rank)) throw std::invalid_argument("TensorField::set: component count mismatch");
  if (symmetry == Symmetry::none || rank < 2)
    values[node] = v;
  else
    values[node] = symmetrize(v, rank, symmetry == Symmetry::antisymmetric);
}

void write_snapshot(std::ostream& os, const TensorField& f) {
  os << "g2lab-field 1\n";
  os << "model " << f.model << "\n";
  os << "link " << f.link << "\n";
  os << "grid " << (f.grid.spacing == Spacing::uniform ? "uniform" : "log") << ' ' << f.grid.n << ' '
     << hex(f.grid.t_min) << ' ' << hex(f.grid.t_max) << "\n";
  os << "valence 0 " << f.rank << "\n";
  os << "symmetry " << sym_name(f.symmetry) << "\n";
  const std::size_t nc = pow7(f.rank);
  os << "components " << nc << "\n";
  // Column-major: one line per component, running over nodes.
  for (std::size_t c = 0; c < nc; ++c) {
    for (int i = 0; i < f.grid.n; ++i) os << (i ? " " : "") << hex(f.values[i][c]);
    os << "\n";
  }
}

TensorField read_snapshot(std::istream& is) {
  if (expect(is, "g2lab-field") != "1") throw std::runtime_error("snapshot: unsupported version");
  TensorField f;
  f.model = expect(is, "model");
  f.link = expect(is, "link");
  {
    std::istringstream ss(expect(is, "grid"));
    std::string sp, a, b;
    int n = 0;
    ss >> sp >> n >> a >> b;
    if (sp != "uniform" && sp != "log") throw std::runtime_error("snapshot: bad spacing '" + sp + "'");
    f.grid = RadialGrid(parse_hex(a), parse_hex(b), n, sp == "log" ? Spacing::log : Spacing::uniform);
  }
  {
    std::istringstream ss(expect(is, "valence"));
    int up = 0;
    ss >> up >> f.rank;
    if (up != 0 || f.rank < 0 || f.rank > 6) throw std::runtime_error("snapshot: bad valence");
  }
  const std::string s = expect(is, "symmetry");
  f.symmetry = s == "symmetric" ? Symmetry::symmetric : s == "antisymmetric" ? Symmetry::antisymmetric : Symmetry::none;
  const std::size_t nc = std::stoul(expect(is, "components"));
  if (nc != pow7(f.rank)) throw std::runtime_error("snapshot: component count does not match valence");
  f.values.assign(f.grid.n, Dense<double>(nc, 0.0));
  std::string tok;
  for (std::size_t c = 0; c < nc; ++c)
    for (int i = 0; i < f.grid.n; ++i) {
      if (!(is >> tok)) throw std::runtime_error("snapshot: truncated data");
      f.values[i][c] = parse_hex(tok);
    }
  return f;
}

void save_snapshot(const std::string& path, const TensorField& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path);
  write_snapshot(os, f);
}

TensorField load_snapshot(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_snapshot(is);
}

}  // namespace g2lab
