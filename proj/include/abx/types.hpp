#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace abx {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Frames x dims. Storage is single precision; distances accumulate in double.
using FeatureMatrix = RowMatrix<float>;

using DistanceMatrix = Eigen::MatrixXd;

/// Row position in a LabelTable.
using ItemIndex = std::size_t;

}  // namespace abx
