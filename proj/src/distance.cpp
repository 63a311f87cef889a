#include "abx/distance.hpp"

#include <exception>
#include <mutex>

#include "abx/parallel.hpp"

namespace abx {

namespace {

using LengthMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// Diagonals shorter than this are swept by the calling thread.
constexpr Eigen::Index kParallelDiagonal = 512;

inline void relax(const Eigen::Ref<const Eigen::MatrixXd>& d, Eigen::MatrixXd& c, LengthMatrix& len, Eigen::Index i,
                  Eigen::Index j) {
  if (i == 0 && j == 0) {
    c(0, 0) = d(0, 0);
    len(0, 0) = 1;
    return;
  }
  if (i == 0) {
    c(0, j) = d(0, j) + c(0, j - 1);
    len(0, j) = len(0, j - 1) + 1;
    return;
  }
  if (j == 0) {
    c(i, 0) = d(i, 0) + c(i - 1, 0);
    len(i, 0) = len(i - 1, 0) + 1;
    return;
  }
  double best = c(i - 1, j - 1);
  std::int64_t best_len = len(i - 1, j - 1);
  if (c(i - 1, j) < best) {
    best = c(i - 1, j);
    best_len = len(i - 1, j);
  }
  if (c(i, j - 1) < best) {
    best = c(i, j - 1);
    best_len = len(i, j - 1);
  }
  c(i, j) = d(i, j) + best;
  len(i, j) = best_len + 1;
}

}  // namespace

FrameMetric parse_metric(std::string_view name) {
  if (name == "angular") return FrameMetric::angular;
  if (name == "euclidean") return FrameMetric::euclidean;
  if (name == "manhattan") return FrameMetric::manhattan;
  throw SpecError("unknown distance '" + std::string(name) + "'");
}

std::string_view to_string(FrameMetric metric) {
  switch (metric) {
    case FrameMetric::angular: return "angular";
    case FrameMetric::euclidean: return "euclidean";
    case FrameMetric::manhattan: return "manhattan";
  }
  return "?";
}

DistanceMode parse_mode(std::string_view name) {
  if (name == "dtw") return DistanceMode::dtw;
  if (name == "mean-pool") return DistanceMode::mean_pool;
  throw SpecError("unknown distance mode '" + std::string(name) + "'");
}

std::string_view to_string(DistanceMode mode) { return mode == DistanceMode::dtw ? "dtw" : "mean-pool"; }

DtwTable dtw_table(const Eigen::Ref<const Eigen::MatrixXd>& dmat, DpOrder order) {
  const Eigen::Index n = dmat.rows(), m = dmat.cols();
  if (n < 1 || m < 1) throw ShapeError("DTW needs a non-empty distance matrix");
  DtwTable t{Eigen::MatrixXd(n, m), LengthMatrix(n, m)};

  if (order == DpOrder::row_major) {
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < m; ++j) relax(dmat, t.cost, t.length, i, j);
    return t;
  }

  for (Eigen::Index s = 0; s <= n + m - 2; ++s) {
    const Eigen::Index lo = std::max<Eigen::Index>(0, s - (m - 1));
    const Eigen::Index hi = std::min<Eigen::Index>(s, n - 1);
    if (hi - lo + 1 >= kParallelDiagonal && !omp_in_parallel()) {
#pragma omp parallel for schedule(static)
      for (Eigen::Index i = lo; i <= hi; ++i) relax(dmat, t.cost, t.length, i, s - i);
    } else {
      for (Eigen::Index i = lo; i <= hi; ++i) relax(dmat, t.cost, t.length, i, s - i);
    }
  }
  return t;
}

DtwResult dtw(const Eigen::Ref<const Eigen::MatrixXd>& dmat) {
  const DtwTable t = dtw_table(dmat, DpOrder::wavefront);
  const Eigen::Index n = dmat.rows() - 1, m = dmat.cols() - 1;
  DtwResult r;
  r.accumulated = t.cost(n, m);
  r.path_length = t.length(n, m);
  r.cost = r.accumulated / static_cast<double>(r.path_length);
  return r;
}

CellDistances batch_cell_distances(const Cell& cell, const Dataset& dataset, FrameMetric metric, DistanceMode mode,
                                   int workers) {
  for (const auto* items : {&cell.a, &cell.b, &cell.x})
    for (ItemIndex i : *items)
      if (i >= dataset.size())
        throw BoundsError(i, "item " + std::to_string(i) + " is not in a dataset of " +
                                 std::to_string(dataset.size()) + " items");

  const auto n_a = static_cast<Eigen::Index>(cell.a.size());
  const auto n_b = static_cast<Eigen::Index>(cell.b.size());
  const auto n_x = static_cast<Eigen::Index>(cell.x.size());
  CellDistances out{DistanceMatrix::Zero(n_a, n_x), DistanceMatrix::Zero(n_b, n_x)};

  const bool same = cell.x_is_a();
  const std::ptrdiff_t total = (n_a + n_b) * n_x;
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto compute = [&](std::ptrdiff_t p) {
    const Eigen::Index row = p / n_x, k = p % n_x;
    try {
      if (row < n_a) {
        if (same && cell.a[row] == cell.x[k]) return;
        out.ax(row, k) = sequence_distance(dataset.segment(cell.a[row]), dataset.segment(cell.x[k]), metric, mode);
      } else {
        const Eigen::Index j = row - n_a;
        out.bx(j, k) = sequence_distance(dataset.segment(cell.b[j]), dataset.segment(cell.x[k]), metric, mode);
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  const int threads = resolve_workers(workers);
  if (threads > 1 && total > 1 && !omp_in_parallel()) {
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
    for (std::ptrdiff_t p = 0; p < total; ++p) compute(p);
  } else {
    for (std::ptrdiff_t p = 0; p < total; ++p) compute(p);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace abx
