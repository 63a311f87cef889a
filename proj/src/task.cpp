#include "abx/task.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <set>

#include "abx/errors.hpp"
#include "abx/random.hpp"

namespace abx {

namespace {

using Values = std::vector<std::string>;

constexpr char kUnit = '\x1f';
constexpr char kGroup = '\x1e';

void append_joined(std::string& out, const Values& values) {
  for (const auto& v : values) {
    out += v;
    out += kUnit;
  }
  out += kGroup;
}

bool differs_everywhere(const Values& lhs, const Values& rhs) {
  for (std::size_t i = 0; i < lhs.size(); ++i)
    if (lhs[i] == rhs[i]) return false;
  return true;
}

struct Columns {
  std::size_t on;
  std::vector<std::size_t> by;
  std::vector<std::size_t> across;
};

Values gather(const LabelTable& labels, ItemIndex row, const std::vector<std::size_t>& cols) {
  Values out;
  out.reserve(cols.size());
  for (auto c : cols) out.push_back(labels.value(row, c));
  return out;
}

std::vector<Cell> cells_for_group(const LabelTable& labels, const Columns& cols, const Values& by_values,
                                  const std::vector<ItemIndex>& items, const std::optional<SubsamplerSpec>& sub) {
  // on value -> across values -> items, all in sorted order
  std::map<std::string, std::map<Values, std::vector<ItemIndex>>> index;
  for (ItemIndex i : items) index[labels.value(i, cols.on)][gather(labels, i, cols.across)].push_back(i);

  const bool has_across = !cols.across.empty();
  std::optional<std::size_t> x_value_cap;
  if (sub) x_value_cap = sub->max_across_x_values;

  std::vector<Cell> cells;
  for (const auto& [on_ax, ax_groups] : index) {
    for (const auto& [on_b, b_groups] : index) {
      if (on_b == on_ax) continue;
      for (const auto& [ab, a_items] : ax_groups) {
        const auto b_it = b_groups.find(ab);
        if (b_it == b_groups.end()) continue;

        if (!has_across) {
          if (a_items.size() < 2) continue;
          cells.push_back(Cell{on_ax, on_b, by_values, {}, {}, a_items, b_it->second, a_items});
          continue;
        }

        std::vector<const Values*> x_candidates;
        for (const auto& [xv, x_items] : ax_groups)
          if (differs_everywhere(xv, ab)) x_candidates.push_back(&xv);
        if (x_value_cap && x_candidates.size() > *x_value_cap) {
          std::string key;
          append_joined(key, by_values);
          append_joined(key, {on_ax, on_b});
          append_joined(key, ab);
          CounterRng rng(combine_keys(sub->seed, hash_bytes(key) ^ 0x78ULL));
          x_candidates = sample_without_replacement(x_candidates, *x_value_cap, rng);
        }
        for (const Values* xv : x_candidates)
          cells.push_back(Cell{on_ax, on_b, by_values, ab, *xv, a_items, b_it->second, ax_groups.at(*xv)});
      }
    }
  }
  return cells;
}

}  // namespace

void TaskSpec::validate(const LabelTable& labels) const {
  if (on.empty()) throw SpecError("ON attribute is required");
  labels.column_index(on);
  std::set<std::string> seen{on};
  for (const auto* group : {&by, &across}) {
    for (const auto& name : *group) {
      labels.column_index(name);
      if (!seen.insert(name).second)
        throw SpecError("attribute '" + name + "' appears in more than one condition");
    }
  }
}

void SubsamplerSpec::validate() const {
  for (const auto& limit : {max_a, max_b, max_x, max_across_x_values})
    if (limit && *limit < 1) throw SpecError("subsampling limits must be at least 1");
}

std::vector<Cell> build_task(const LabelTable& labels, const TaskSpec& spec, const std::optional<SubsamplerSpec>& sub) {
  spec.validate(labels);
  if (sub) sub->validate();

  Columns cols{labels.column_index(spec.on), {}, {}};
  for (const auto& n : spec.by) cols.by.push_back(labels.column_index(n));
  for (const auto& n : spec.across) cols.across.push_back(labels.column_index(n));

  std::map<Values, std::vector<ItemIndex>> by_groups;
  for (ItemIndex i = 0; i < labels.size(); ++i) by_groups[gather(labels, i, cols.by)].push_back(i);

  std::vector<const std::pair<const Values, std::vector<ItemIndex>>*> groups;
  groups.reserve(by_groups.size());
  for (const auto& g : by_groups) groups.push_back(&g);

  std::vector<std::vector<Cell>> per_group(groups.size());
  const auto n_groups = static_cast<std::ptrdiff_t>(groups.size());
#pragma omp parallel for schedule(dynamic, 16) if (n_groups > 64)
  for (std::ptrdiff_t g = 0; g < n_groups; ++g)
    per_group[g] = cells_for_group(labels, cols, groups[g]->first, groups[g]->second, sub);

  std::vector<Cell> cells;
  for (auto& group : per_group)
    for (auto& cell : group) cells.push_back(sub && sub->limits_cells() ? subsample(cell, *sub) : std::move(cell));
  return cells;
}

Task::Task(const LabelTable& labels, TaskSpec spec, std::optional<SubsamplerSpec> sub)
    : spec_(std::move(spec)), cells_(build_task(labels, spec_, sub)) {}

std::uint64_t triple_count(const Cell& cell) {
  const std::uint64_t a = cell.a.size(), b = cell.b.size(), x = cell.x.size();
  return cell.x_is_a() ? a * b * x - a * b : a * b * x;
}

std::vector<Triple> enumerate_triples(const Cell& cell) {
  std::vector<Triple> out;
  out.reserve(triple_count(cell));
  for_each_triple(cell, [&](const Triple& t) { out.push_back(t); });
  return out;
}

std::string cell_key(const Cell& cell) {
  std::string key;
  append_joined(key, {cell.on_ax, cell.on_b});
  append_joined(key, cell.by);
  append_joined(key, cell.across_ab);
  append_joined(key, cell.across_x);
  return key;
}

Cell subsample(const Cell& cell, const SubsamplerSpec& sub) {
  const std::uint64_t base = hash_bytes(cell_key(cell));
  auto draw = [&](const std::vector<ItemIndex>& items, std::size_t limit, std::uint64_t tag) {
    CounterRng rng(combine_keys(sub.seed, combine_keys(base, tag)));
    return sample_without_replacement(items, limit, rng);
  };

  Cell out = cell;
  if (cell.x_is_a()) {
    std::optional<std::size_t> cap;
    for (const auto& limit : {sub.max_a, sub.max_x})
      if (limit) cap = cap ? std::min(*cap, *limit) : *limit;
    if (cap) {
      out.a = draw(cell.a, std::max<std::size_t>(*cap, 2), 'A');
      out.x = out.a;
    }
  } else {
    if (sub.max_a) out.a = draw(cell.a, *sub.max_a, 'A');
    if (sub.max_x) out.x = draw(cell.x, *sub.max_x, 'X');
  }
  if (sub.max_b) out.b = draw(cell.b, *sub.max_b, 'B');
  return out;
}

std::string cell_description(const TaskSpec& spec, const Cell& cell) {
  std::string out = "Cell(ON(" + spec.on + "_ax = " + cell.on_ax + ", " + spec.on + "_b = " + cell.on_b + ")";
  for (std::size_t i = 0; i < spec.by.size(); ++i) out += ", BY(" + spec.by[i] + "_abx = " + cell.by[i] + ")";
  for (std::size_t i = 0; i < spec.across.size(); ++i)
    out += ", ACROSS(" + spec.across[i] + "_ab = " + cell.across_ab[i] + ", " + spec.across[i] +
           "_x = " + cell.across_x[i] + ")";
  out += ")";
  return out;
}

void write_task_dump(std::ostream& out, const Task& task) {
  for (const auto& cell : task) {
    out << cell_description(task.spec(), cell) << '\t' << cell.a.size() << '\t' << cell.b.size() << '\t'
        << cell.x.size() << '\t' << triple_count(cell) << '\n';
  }
}

}  // namespace abx
