#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace corrnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using BinaryMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;
using Point3 = Eigen::Vector3d;

// Sorted, duplicate-free voxel indices.
using IndexSet = std::vector<int>;

}  // namespace corrnet
