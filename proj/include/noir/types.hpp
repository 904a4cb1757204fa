#pragma once

#include <Eigen/Dense>

namespace noir {

template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixX = Mat<double>;
using VectorX = Vec<double>;

using Index = Eigen::Index;

}  // namespace noir
