#pragma once

#include <Eigen/Dense>

namespace csf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace csf
