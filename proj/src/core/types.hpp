// Shared aliases for the dense linear algebra used throughout the core.
#pragma once

#include <Eigen/Dense>
#include <vector>

namespace finsler {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline std::vector<double> to_std(const Vec& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Vec to_vec(const double* p, int n) { return Eigen::Map<const Vec>(p, n); }

}  // namespace finsler
