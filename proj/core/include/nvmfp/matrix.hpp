#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "nvmfp/protocol.hpp"

namespace nvmfp {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Samples as rows.
Matrix to_matrix(const Dataset& ds);

// Copies the listed columns, in the listed order.
Matrix select_columns(const Matrix& x, std::span<const int> columns);

}  // namespace nvmfp
