#pragma once

#include <random>

#include "alphascreen/panel.hpp"

namespace testing_util {

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols,
                                std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = z(rng);
  return m;
}

inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(1.0, b.norm());
  return (a - b).norm() / scale;
}

// Dense projector A (A^T A)^{-1} A^T built by explicit inversion.
inline Eigen::MatrixXd dense_projector(const Eigen::MatrixXd& a) {
  return a * (a.transpose() * a).inverse() * a.transpose();
}

}  // namespace testing_util
