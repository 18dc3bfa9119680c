#pragma once

#include <Eigen/Dense>

namespace peeropt {

using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat43 = Eigen::Matrix<double, 4, 3>;
using MatX = Eigen::MatrixXd;
using VecX = Eigen::VectorXd;
using CMat4 = Eigen::Matrix4cd;
using Complex = std::complex<double>;

/// Number of stages of the supported method family.
inline constexpr int kStages = 4;
/// Stage order of the supported method family.
inline constexpr int kStageOrder = 3;

}  // namespace peeropt
