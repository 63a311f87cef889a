#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "abx/dataset.hpp"
#include "abx/errors.hpp"
#include "abx/task.hpp"
#include "abx/types.hpp"

namespace abx {

enum class FrameMetric { angular, euclidean, manhattan };
enum class DistanceMode { dtw, mean_pool };

/// Accepts `angular`, `euclidean`, `manhattan`; throws SpecError otherwise.
FrameMetric parse_metric(std::string_view name);
std::string_view to_string(FrameMetric metric);
/// Accepts `dtw`, `mean-pool`.
DistanceMode parse_mode(std::string_view name);
std::string_view to_string(DistanceMode mode);

/// Distance between two frames, accumulated in double in a fixed element
/// order, so d(u, v) and d(v, u) agree bit for bit. The angular distance
/// is arccos(cos)/pi in [0, 1]; a zero-norm frame gives 0.5.
template <typename DerivedU, typename DerivedV>
double frame_distance(const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedV>& v,
                      FrameMetric metric) {
  const Eigen::Index n = u.size();
  switch (metric) {
    case FrameMetric::euclidean: {
      double sum = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        const double diff = static_cast<double>(u.coeff(k)) - static_cast<double>(v.coeff(k));
        sum += diff * diff;
      }
      return std::sqrt(sum);
    }
    case FrameMetric::manhattan: {
      double sum = 0.0;
      for (Eigen::Index k = 0; k < n; ++k)
        sum += std::abs(static_cast<double>(u.coeff(k)) - static_cast<double>(v.coeff(k)));
      return sum;
    }
    case FrameMetric::angular: {
      double dot = 0.0, uu = 0.0, vv = 0.0;
      for (Eigen::Index k = 0; k < n; ++k) {
        const double a = static_cast<double>(u.coeff(k));
        const double b = static_cast<double>(v.coeff(k));
        dot += a * b;
        uu += a * a;
        vv += b * b;
      }
      const double norms = std::sqrt(uu) * std::sqrt(vv);
      if (norms == 0.0) return 0.5;
      return std::acos(std::clamp(dot / norms, -1.0, 1.0)) / std::numbers::pi;
    }
  }
  return 0.0;
}

/// Entry (i, j) is the metric between row i of `s1` and row j of `s2`.
template <typename Derived1, typename Derived2>
DistanceMatrix frame_distance_matrix(const Eigen::MatrixBase<Derived1>& s1, const Eigen::MatrixBase<Derived2>& s2,
                                     FrameMetric metric) {
  if (s1.cols() != s2.cols())
    throw ShapeError("frame dimension mismatch: " + std::to_string(s1.cols()) + " vs " + std::to_string(s2.cols()));
  if (s1.rows() < 1 || s2.rows() < 1) throw ShapeError("sequences must have at least one frame");
  DistanceMatrix d(s1.rows(), s2.rows());
  for (Eigen::Index i = 0; i < s1.rows(); ++i)
    for (Eigen::Index j = 0; j < s2.rows(); ++j) d(i, j) = frame_distance(s1.row(i), s2.row(j), metric);
  return d;
}

struct DtwResult {
  /// Accumulated cost divided by path_length.
  double cost = 0.0;
  /// Sum of frame distances along the optimal path.
  double accumulated = 0.0;
  /// Number of matrix cells on the path.
  std::int64_t path_length = 0;
};

enum class DpOrder { wavefront, row_major };

/// Full dynamic-programming state: accumulated cost and the length of the
/// path selected at each cell.
struct DtwTable {
  Eigen::MatrixXd cost;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> length;
};

/// c(i,j) = d(i,j) + min(c(i-1,j), c(i,j-1), c(i-1,j-1)) with a cumulative
/// first row and column. Ties prefer the diagonal, then (i-1, j), then
/// (i, j-1). Wavefront order sweeps anti-diagonals; every entry of a
/// diagonal depends only on the previous two, so long diagonals are split
/// across threads. Both orders yield identical tables.
DtwTable dtw_table(const Eigen::Ref<const Eigen::MatrixXd>& dmat, DpOrder order = DpOrder::wavefront);

/// Throws ShapeError on an empty matrix.
DtwResult dtw(const Eigen::Ref<const Eigen::MatrixXd>& dmat);

template <typename DerivedA, typename DerivedX>
double sequence_distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedX>& x,
                         FrameMetric metric, DistanceMode mode) {
  if (mode == DistanceMode::dtw) return dtw(frame_distance_matrix(a, x, metric)).cost;
  if (a.cols() != x.cols())
    throw ShapeError("frame dimension mismatch: " + std::to_string(a.cols()) + " vs " + std::to_string(x.cols()));
  if (a.rows() < 1 || x.rows() < 1) throw ShapeError("sequences must have at least one frame");
  const Eigen::RowVectorXd mean_a = a.template cast<double>().colwise().mean();
  const Eigen::RowVectorXd mean_x = x.template cast<double>().colwise().mean();
  return frame_distance(mean_a, mean_x, metric);
}

struct CellDistances {
  DistanceMatrix ax;  // |A| x |X|
  DistanceMatrix bx;  // |B| x |X|
};

/// Pairwise sequence distances for one cell; each (a, x) and (b, x) pair is
/// computed once. When X = A the a == x diagonal is left at zero. Pairs are
/// split across `workers` threads (0 = all); values do not depend on it.
CellDistances batch_cell_distances(const Cell& cell, const Dataset& dataset, FrameMetric metric, DistanceMode mode,
                                   int workers = 0);

}  // namespace abx
