#include "g2lab/tensor.hpp"

#include <Eigen/Eigenvalues>

namespace g2lab {

double min_eigenvalue7(const Mat7<double>& m) {
  Eigen::Matrix<double, 7, 7> a;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) a(i, j) = 0.5 * (m[idx2(i, j)] + m[idx2(j, i)]);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 7, 7>> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace g2lab
