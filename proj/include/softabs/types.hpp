#pragma once

#include <Eigen/Dense>

#include <vector>

namespace softabs {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Third-order derivative tensor stored as N symmetric slices; slice n is dH/dq_n.
using HessianPartials = std::vector<Matrix>;

} // namespace softabs
