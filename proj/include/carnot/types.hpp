#pragma once

#include <Eigen/Dense>

namespace carnot {

/// Largest topological dimension supported; vectors and matrices live on the stack.
inline constexpr int kMaxDim = 16;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

}  // namespace carnot
