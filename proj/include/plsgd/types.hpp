#pragma once

#include <Eigen/Dense>

namespace plsgd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

}  // namespace plsgd
