#include "abx/score.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>

#include "abx/errors.hpp"
#include "abx/format.hpp"
#include "abx/parallel.hpp"

namespace abx {

namespace {

// Grouping key: ordered ON pair followed by one slot per BY/ACROSS attribute.
// An ACROSS slot holds the (ab, x) pair joined by a separator.
struct KeyedScore {
  OnPair on;
  std::vector<std::optional<std::string>> keys;
  double score;
};

std::vector<std::string> key_columns(const TaskSpec& spec) {
  std::vector<std::string> cols = spec.by;
  cols.insert(cols.end(), spec.across.begin(), spec.across.end());
  return cols;
}

std::vector<KeyedScore> keyed_rows(const ScoreTable& table) {
  std::vector<KeyedScore> rows;
  rows.reserve(table.rows.size());
  for (const auto& r : table.rows) {
    KeyedScore k{{r.on_ax, r.on_b}, {}, r.score};
    for (const auto& v : r.by) k.keys.emplace_back(v);
    for (std::size_t i = 0; i < r.across_ab.size(); ++i) k.keys.emplace_back(r.across_ab[i] + '\x1f' + r.across_x[i]);
    rows.push_back(std::move(k));
  }
  return rows;
}

std::vector<KeyedScore> average_groups(const std::vector<KeyedScore>& rows) {
  struct Acc {
    double sum = 0.0;
    std::size_t count = 0;
  };
  std::map<std::pair<OnPair, std::vector<std::optional<std::string>>>, Acc> groups;
  for (const auto& r : rows) {
    auto& acc = groups[{r.on, r.keys}];
    acc.sum += r.score;
    ++acc.count;
  }
  std::vector<KeyedScore> out;
  out.reserve(groups.size());
  for (const auto& [key, acc] : groups)
    out.push_back({key.first, key.second, acc.sum / static_cast<double>(acc.count)});
  return out;
}

std::map<OnPair, double> mean_per_on_pair(const std::vector<KeyedScore>& rows) {
  std::map<OnPair, std::pair<double, std::size_t>> acc;
  for (const auto& r : rows) {
    auto& [sum, count] = acc[r.on];
    sum += r.score;
    ++count;
  }
  std::map<OnPair, double> out;
  for (const auto& [on, a] : acc) out.emplace(on, a.first / static_cast<double>(a.second));
  return out;
}

}  // namespace

CellScore score_cell(const Cell& cell, const DistanceMatrix& d_ax, const DistanceMatrix& d_bx) {
  const auto n_a = static_cast<Eigen::Index>(cell.a.size());
  const auto n_b = static_cast<Eigen::Index>(cell.b.size());
  const auto n_x = static_cast<Eigen::Index>(cell.x.size());
  if (d_ax.rows() != n_a || d_ax.cols() != n_x || d_bx.rows() != n_b || d_bx.cols() != n_x)
    throw ShapeError("distance matrices do not match the cell sizes");

  // Twice the score numerator: 2 per success, 1 per tie. Keeps the sum exact.
  std::uint64_t doubled = 0;
  std::uint64_t n = 0;
  for (Eigen::Index k = 0; k < n_x; ++k) {
    for (Eigen::Index i = 0; i < n_a; ++i) {
      if (cell.a[i] == cell.x[k]) continue;
      const double ax = d_ax(i, k);
      for (Eigen::Index j = 0; j < n_b; ++j) {
        const double bx = d_bx(j, k);
        if (ax < bx)
          doubled += 2;
        else if (ax == bx)
          doubled += 1;
        ++n;
      }
    }
  }
  if (n == 0) throw InvalidCellError("cell " + cell.on_ax + "/" + cell.on_b + " has no valid triple");

  CellScore s;
  s.on_ax = cell.on_ax;
  s.on_b = cell.on_b;
  s.by = cell.by;
  s.across_ab = cell.across_ab;
  s.across_x = cell.across_x;
  s.score = static_cast<double>(doubled) / (2.0 * static_cast<double>(n));
  s.n_triples = n;
  return s;
}

ScoreTable score_task(const Task& task, const Dataset& dataset, FrameMetric metric, DistanceMode mode, int workers) {
  ScoreTable table{task.spec(), std::vector<CellScore>(task.size())};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto n = static_cast<std::ptrdiff_t>(task.size());
  const int threads = resolve_workers(workers);

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads) if (threads > 1 && n > 1)
  for (std::ptrdiff_t c = 0; c < n; ++c) {
    try {
      const auto d = batch_cell_distances(task[c], dataset, metric, mode, 1);
      table.rows[c] = score_cell(task[c], d.ax, d.bx);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return table;
}

double collapse_weighted(const ScoreTable& table) {
  if (table.rows.empty()) throw DataError("cannot collapse an empty score table");
  double weighted = 0.0, total = 0.0;
  for (const auto& r : table.rows) {
    weighted += r.score * static_cast<double>(r.n_triples);
    total += static_cast<double>(r.n_triples);
  }
  return weighted / total;
}

double collapse_levels(const ScoreTable& table, const std::vector<Level>& levels) {
  if (table.rows.empty()) throw DataError("cannot collapse an empty score table");
  const auto columns = key_columns(table.spec);

  std::vector<std::vector<std::size_t>> level_slots;
  std::set<std::string> used;
  for (const auto& level : levels) {
    if (level.empty()) throw SpecError("empty collapse level");
    std::vector<std::size_t> slots;
    for (const auto& name : level) {
      const auto it = std::find(columns.begin(), columns.end(), name);
      if (it == columns.end()) throw SpecError("collapse level names '" + name + "', which is not a BY or ACROSS attribute");
      if (!used.insert(name).second) throw SpecError("attribute '" + name + "' appears in more than one level");
      slots.push_back(static_cast<std::size_t>(it - columns.begin()));
    }
    level_slots.push_back(std::move(slots));
  }

  auto rows = keyed_rows(table);
  for (const auto& slots : level_slots) {
    for (auto& r : rows)
      for (auto s : slots) r.keys[s].reset();
    rows = average_groups(rows);
  }

  const auto per_pair = mean_per_on_pair(rows);
  double sum = 0.0;
  for (const auto& [on, v] : per_pair) sum += v;
  return sum / static_cast<double>(per_pair.size());
}

std::map<OnPair, double> confusion_matrix(const ScoreTable& table) {
  if (table.rows.empty()) throw DataError("cannot build a confusion matrix from an empty score table");
  auto per_pair = mean_per_on_pair(keyed_rows(table));
  for (auto& [on, v] : per_pair) v = 1.0 - v;
  return per_pair;
}

std::map<OnPair, double> symmetrize(const std::map<OnPair, double>& matrix) {
  std::map<OnPair, std::pair<double, int>> acc;
  for (const auto& [on, v] : matrix) {
    const OnPair key = on.first < on.second ? on : OnPair{on.second, on.first};
    auto& [sum, count] = acc[key];
    sum += v;
    ++count;
  }
  std::map<OnPair, double> out;
  for (const auto& [key, a] : acc) out.emplace(key, a.first / a.second);
  return out;
}

void write_score_csv(std::ostream& out, const ScoreTable& table) {
  const auto& spec = table.spec;
  out << csv_field(spec.on + "_ax") << ',' << csv_field(spec.on + "_b");
  for (const auto& b : spec.by) out << ',' << csv_field(b);
  for (const auto& a : spec.across) out << ',' << csv_field(a + "_ab") << ',' << csv_field(a + "_x");
  out << ",score,n_triples\n";
  for (const auto& r : table.rows) {
    out << csv_field(r.on_ax) << ',' << csv_field(r.on_b);
    for (const auto& v : r.by) out << ',' << csv_field(v);
    for (std::size_t i = 0; i < r.across_ab.size(); ++i)
      out << ',' << csv_field(r.across_ab[i]) << ',' << csv_field(r.across_x[i]);
    out << ',' << format_decimal(r.score) << ',' << r.n_triples << '\n';
  }
}

}  // namespace abx
