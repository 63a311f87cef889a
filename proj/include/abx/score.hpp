#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "abx/dataset.hpp"
#include "abx/distance.hpp"
#include "abx/task.hpp"

namespace abx {

/// Discriminability of one cell with the condition values that identify it.
struct CellScore {
  std::string on_ax;
  std::string on_b;
  std::vector<std::string> by;
  std::vector<std::string> across_ab;
  std::vector<std::string> across_x;
  double score = 0.0;
  std::uint64_t n_triples = 0;
};

struct ScoreTable {
  TaskSpec spec;
  std::vector<CellScore> rows;
};

/// Fraction of triples with d(a,x) < d(b,x), ties counted as one half.
/// Equality is exact floating-point equality. Triples with a == x are
/// skipped. Throws InvalidCellError when no triple remains and ShapeError
/// when the matrices do not match the cell.
CellScore score_cell(const Cell& cell, const DistanceMatrix& d_ax, const DistanceMatrix& d_bx);

/// Distances and scores for every cell. Cells are spread over `workers`
/// threads (0 = all); the table is identical for any worker count.
ScoreTable score_task(const Task& task, const Dataset& dataset, FrameMetric metric, DistanceMode mode,
                      int workers = 0);

/// Sum(score * n_triples) / Sum(n_triples).
double collapse_weighted(const ScoreTable& table);

/// One averaging level: a set of BY or ACROSS attribute names.
using Level = std::vector<std::string>;

/// For each level in turn, drops its attributes from the grouping keys and
/// replaces every group by its unweighted mean. What remains is averaged per
/// ordered ON pair, then over ON pairs.
double collapse_levels(const ScoreTable& table, const std::vector<Level>& levels);

using OnPair = std::pair<std::string, std::string>;

/// Error rate 1 - score per ordered (on_ax, on_b), averaged unweighted over
/// every other key.
std::map<OnPair, double> confusion_matrix(const ScoreTable& table);

/// Keys become unordered pairs stored as (min, max); the value is the mean
/// of the ordered entries present.
std::map<OnPair, double> symmetrize(const std::map<OnPair, double>& matrix);

/// Header `<on>_ax,<on>_b,<by...>,<across>_ab,<across>_x...,score,n_triples`.
void write_score_csv(std::ostream& out, const ScoreTable& table);

}  // namespace abx
