#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "abx/dataset.hpp"
#include "abx/types.hpp"

namespace abx {

/// ON/BY/ACROSS conditions. `on` is shared by a and x and differs for b,
/// `by` is shared by all three, `across` is shared by a and b and differs for x.
struct TaskSpec {
  std::string on;
  std::vector<std::string> by;
  std::vector<std::string> across;

  /// Throws SpecError on unknown or overlapping attribute names.
  void validate(const LabelTable& labels) const;
};

/// Caps applied independently in each cell. Unset limits are no-ops.
struct SubsamplerSpec {
  std::optional<std::size_t> max_a;
  std::optional<std::size_t> max_b;
  std::optional<std::size_t> max_x;
  /// Number of across_x value combinations kept per (by, on pair, across_ab) group.
  std::optional<std::size_t> max_across_x_values;
  std::uint64_t seed = 0;

  void validate() const;
  bool limits_cells() const { return max_a || max_b || max_x; }
};

/// One A x B x X triple set. `by` is aligned with TaskSpec::by, the across
/// vectors with TaskSpec::across. Without ACROSS conditions X holds the same
/// items as A and triples with a == x are excluded.
struct Cell {
  std::string on_ax;
  std::string on_b;
  std::vector<std::string> by;
  std::vector<std::string> across_ab;
  std::vector<std::string> across_x;
  std::vector<ItemIndex> a;
  std::vector<ItemIndex> b;
  std::vector<ItemIndex> x;

  bool x_is_a() const { return across_ab.empty(); }
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct Triple {
  ItemIndex a;
  ItemIndex b;
  ItemIndex x;
  friend bool operator==(const Triple&, const Triple&) = default;
};

/// Every valid cell, sorted by BY values, then on_ax, on_b, across_ab, across_x.
std::vector<Cell> build_task(const LabelTable& labels, const TaskSpec& spec,
                             const std::optional<SubsamplerSpec>& sub = std::nullopt);

class Task {
 public:
  Task(const LabelTable& labels, TaskSpec spec, std::optional<SubsamplerSpec> sub = std::nullopt);

  const TaskSpec& spec() const { return spec_; }
  const std::vector<Cell>& cells() const { return cells_; }
  std::size_t size() const { return cells_.size(); }
  const Cell& operator[](std::size_t i) const { return cells_[i]; }
  auto begin() const { return cells_.begin(); }
  auto end() const { return cells_.end(); }

 private:
  TaskSpec spec_;
  std::vector<Cell> cells_;
};

/// |A||B||X|, minus |B||A| when X = A.
std::uint64_t triple_count(const Cell& cell);

/// Visits (a, b, x) in a-major, then b, then x order, skipping a == x.
template <typename F>
void for_each_triple(const Cell& cell, F&& visit) {
  for (ItemIndex a : cell.a)
    for (ItemIndex b : cell.b)
      for (ItemIndex x : cell.x)
        if (a != x) visit(Triple{a, b, x});
}

std::vector<Triple> enumerate_triples(const Cell& cell);

/// Stable identity of a cell from its condition values only.
std::string cell_key(const Cell& cell);

/// Random subsets of A, B and X, keyed by (seed, cell_key) so the draw does
/// not depend on iteration order. When X = A the shared list is capped by
/// min(max_a, max_x) but never below 2.
Cell subsample(const Cell& cell, const SubsamplerSpec& sub);

/// `Cell(ON(#phone_ax = AO, #phone_b = IH), BY(speaker_abx = 6295), ...)`
std::string cell_description(const TaskSpec& spec, const Cell& cell);

/// One line per cell: description, |A|, |B|, |X|, triple count (tab-separated).
void write_task_dump(std::ostream& out, const Task& task);

}  // namespace abx
