#include "g2lab/link.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "g2lab/g2core.hpp"

namespace g2lab {

namespace {

using Mat = Eigen::Matrix<double, 7, 7>;

Mat to_mat(const std::array<double, 49>& a) {
  Mat m;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) m(i, j) = a[idx2(i, j)];
  return m;
}

std::array<double, 49> from_mat(const Mat& m) {
  std::array<double, 49> a{};
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) a[idx2(i, j)] = m(i, j);
  return a;
}

// Jacobi residual for structure constants f[a][b][c] = coefficient of basis c in [b_a, b_b].
double jacobi_of(const std::vector<double>& f, int D) {
  auto F = [&](int a, int b, int c) { return f[(std::size_t(a) * D + b) * D + c]; };
  double worst = 0.0;
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b)
      for (int c = 0; c < D; ++c)
        for (int l = 0; l < D; ++l) {
          double s = 0.0;
          for (int m = 0; m < D; ++m) s += F(a, b, m) * F(m, c, l) + F(b, c, m) * F(m, a, l) + F(c, a, m) * F(m, b, l);
          worst = std::max(worst, std::abs(s));
        }
  return worst;
}

S6Algebra build_s6() {
  const Dense<double> phi = standard_phi_dense<double>();
  // so(7) basis E_ab, a < b, and the map A -> A.phi.
  std::vector<Mat> so7;
  for (int a = 0; a < 7; ++a)
    for (int b = a + 1; b < 7; ++b) {
      Mat m = Mat::Zero();
      m(a, b) = 1.0;
      m(b, a) = -1.0;
      so7.push_back(m);
    }
  const auto& c3 = combinations(3);
  Eigen::MatrixXd L(35, 21);
  for (int col = 0; col < 21; ++col) {
    const Mat& A = so7[col];
    for (std::size_t r = 0; r < c3.size(); ++r) {
      const int i = c3[r].i[0], j = c3[r].i[1], k = c3[r].i[2];
      double s = 0.0;
      for (int m = 0; m < 7; ++m)
        s += A(m, i) * phi[idx3(m, j, k)] + A(m, j) * phi[idx3(i, m, k)] + A(m, k) * phi[idx3(i, j, m)];
      L(int(r), col) = s;
    }
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(L);
  Eigen::MatrixXd ker = lu.kernel();  // 21 x 14
  // Stabilizer of e0 inside g2: A(:, 0) = 0.
  Eigen::MatrixXd col0(7, ker.cols());
  std::vector<Mat> g2(ker.cols());
  for (int c = 0; c < ker.cols(); ++c) {
    Mat m = Mat::Zero();
    for (int b = 0; b < 21; ++b) m += ker(b, c) * so7[b];
    g2[c] = m;
    col0.col(c) = m.col(0);
  }
  // Solve for X_a in g2 with X_a e0 = e_a; any solution differs by an element
  // of h, so project onto the orthogonal complement of h.
  Eigen::FullPivLU<Eigen::MatrixXd> lu0(col0);
  Eigen::MatrixXd hk = lu0.kernel();  // 14 x 8
  std::vector<Mat> h(hk.cols());
  for (int c = 0; c < hk.cols(); ++c) {
    Mat m = Mat::Zero();
    for (int b = 0; b < int(g2.size()); ++b) m += hk(b, c) * g2[b];
    h[c] = m;
  }
  // Gram-Schmidt on h under the Frobenius product.
  for (std::size_t a = 0; a < h.size(); ++a) {
    for (std::size_t b = 0; b < a; ++b) h[a] -= (h[a].cwiseProduct(h[b]).sum()) * h[b];
    h[a] /= std::sqrt(h[a].cwiseProduct(h[a]).sum());
  }
  S6Algebra out;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(col0, Eigen::ComputeThinU | Eigen::ComputeThinV);
  for (int a = 1; a < 7; ++a) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(7);
    rhs(a) = 1.0;
    Eigen::VectorXd coef = svd.solve(rhs);
    Mat X = Mat::Zero();
    for (int b = 0; b < int(g2.size()); ++b) X += coef(b) * g2[b];
    for (const Mat& z : h) X -= (X.cwiseProduct(z).sum()) * z;
    out.m_basis[a] = from_mat(X);
  }
  for (const Mat& m : g2) out.g2_basis.push_back(from_mat(m));

  // Jacobi on the structure constants of g2 = m + h expressed in (X_a, h_b).
  std::vector<Mat> basis;
  for (int a = 1; a < 7; ++a) basis.push_back(to_mat(out.m_basis[a]));
  for (const Mat& z : h) basis.push_back(z);
  const int D = int(basis.size());
  Eigen::MatrixXd B(49, D);
  for (int c = 0; c < D; ++c)
    for (int e = 0; e < 49; ++e) B(e, c) = basis[c](e / 7, e % 7);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
  std::vector<double> f(std::size_t(D) * D * D);
  double closure = 0.0;
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) {
      Mat br = basis[a] * basis[b] - basis[b] * basis[a];
      Eigen::VectorXd v(49);
      for (int e = 0; e < 49; ++e) v(e) = br(e / 7, e % 7);
      Eigen::VectorXd coef = qr.solve(v);
      closure = std::max(closure, (B * coef - v).cwiseAbs().maxCoeff());
      for (int c = 0; c < D; ++c) f[(std::size_t(a) * D + b) * D + c] = coef(c);
    }
  out.jacobi = std::max(closure, jacobi_of(f, D));
  return out;
}

}  // namespace

const S6Algebra& s6_algebra() {
  static const S6Algebra s = build_s6();
  return s;
}

double LinkSpec::antisymmetry_residual() const {
  double w = 0.0;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      for (int k = 0; k < 7; ++k) w = std::max(w, std::abs(c(i, j, k) + c(j, i, k)));
  return w;
}

double LinkSpec::jacobi_residual() const {
  if (has_isotropy && name == "S6") return s6_algebra().jacobi;
  std::vector<double> f(343);
  for (int i = 0; i < 343; ++i) f[i] = C[i];
  return jacobi_of(f, 7);
}

LinkSpec LinkSpec::round_s6() {
  const S6Algebra& alg = s6_algebra();
  LinkSpec L;
  L.name = "S6";
  L.has_isotropy = true;
  L.iso.assign(49, Mat7<double>{});
  for (int i = 1; i < 7; ++i)
    for (int j = 1; j < 7; ++j) {
      const Mat Xi = to_mat(alg.m_basis[i]), Xj = to_mat(alg.m_basis[j]);
      Mat br = Xi * Xj - Xj * Xi;
      const Eigen::Matrix<double, 7, 1> v = br.col(0);
      Mat Z = br;
      for (int k = 1; k < 7; ++k) {
        const double ck = std::abs(v(k)) < 1e-14 ? 0.0 : v(k);
        L.C[idx3(i, j, k)] = ck;
        Z -= ck * to_mat(alg.m_basis[k]);
      }
      Mat7<double> iso{};
      for (int p = 1; p < 7; ++p)
        for (int k = 1; k < 7; ++k) iso[idx2(p, k)] = std::abs(Z(p, k)) < 1e-14 ? 0.0 : Z(p, k);
      L.iso[idx2(i, j)] = iso;
    }
  return L;
}

LinkSpec LinkSpec::iwasawa() {
  // Frame 1..4 = flat T4 directions, 5, 6 = theta1, theta2 with
  // dtheta1 = omega2 = e13 - e24 and dtheta2 = omega3 = -(e14 + e23).
  LinkSpec L;
  L.name = "Iwasawa";
  auto set = [&](int a, int b, int k, double dcoef) {
    // dtheta^k contains dcoef * e^{ab}, so C^k_ab = -dcoef.
    L.C[idx3(a, b, k)] = -dcoef;
    L.C[idx3(b, a, k)] = dcoef;
  };
  set(1, 3, 5, 1.0);
  set(2, 4, 5, -1.0);
  set(1, 4, 6, -1.0);
  set(2, 3, 6, -1.0);
  return L;
}

LinkSpec LinkSpec::torus() {
  LinkSpec L;
  L.name = "T6";
  return L;
}

}  // namespace g2lab
