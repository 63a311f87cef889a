// abx: ABX discriminability from item files and feature directories.
//
//   abx run --item dev.item --features feats/ --frequency 50 --out scores.csv
//   abx inspect --item dev.item --on '#phone' --by speaker
//   abx demo-gaussians --out sweep.csv
//
// Exit codes: 0 success, 1 usage, 2 spec error, 3 I/O error, 4 data error.

#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "abx/dataset.hpp"
#include "abx/distance.hpp"
#include "abx/errors.hpp"
#include "abx/experiments.hpp"
#include "abx/format.hpp"
#include "abx/score.hpp"
#include "abx/task.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kSpec = 2, kIo = 3, kData = 4 };

struct TaskOptions {
  std::string item;
  std::string on = "#phone";
  std::vector<std::string> by;
  std::vector<std::string> across;
  bool speaker_across = false;
  std::optional<std::size_t> max_a, max_b, max_x, max_across_x;
  std::uint64_t seed = 0;
};

struct RunOptions {
  TaskOptions task;
  std::string features;
  double frequency = 50.0;
  std::string metric = "angular";
  std::string mode = "dtw";
  std::vector<std::string> levels;
  bool weighted = false;
  bool legacy = false;
  int workers = 0;
  std::string out;
  std::string confusion;
};

struct DemoOptions {
  std::vector<double> mus;
  std::size_t n_per_class = 50;
  std::size_t dim = 2;
  std::uint64_t seed = 0;
  std::string metric = "euclidean";
  std::string out;
};

bool uses_default_conditions(const TaskOptions& o) { return o.by.empty() && o.across.empty(); }

// Without explicit conditions: the phoneme task, ON #phone BY context and
// BY (or ACROSS) speaker.
abx::TaskSpec task_spec(const TaskOptions& o) {
  abx::TaskSpec spec{o.on, o.by, o.across};
  if (uses_default_conditions(o)) {
    spec.by = {"prev-phone", "next-phone"};
    (o.speaker_across ? spec.across : spec.by).push_back("speaker");
  }
  return spec;
}

std::optional<abx::SubsamplerSpec> subsampler(const TaskOptions& o) {
  if (!o.max_a && !o.max_b && !o.max_x && !o.max_across_x) return std::nullopt;
  abx::SubsamplerSpec sub;
  sub.max_a = o.max_a;
  sub.max_b = o.max_b;
  sub.max_x = o.max_x;
  sub.max_across_x_values = o.max_across_x;
  sub.seed = o.seed;
  return sub;
}

std::vector<abx::Level> parse_levels(const RunOptions& o) {
  std::vector<abx::Level> levels;
  for (const auto& text : o.levels) {
    abx::Level level;
    std::stringstream ss(text);
    std::string name;
    while (std::getline(ss, name, ','))
      if (!name.empty()) level.push_back(name);
    levels.push_back(std::move(level));
  }
  if (levels.empty() && uses_default_conditions(o.task)) levels = {{"prev-phone", "next-phone"}, {"speaker"}};
  return levels;
}

void add_task_options(CLI::App& cmd, TaskOptions& o) {
  cmd.add_option("--item", o.item, "Item file")->required();
  cmd.add_option("--on", o.on, "ON attribute")->capture_default_str();
  cmd.add_option("--by", o.by, "BY attribute (repeatable or comma-separated)")->delimiter(',');
  cmd.add_option("--across", o.across, "ACROSS attribute (repeatable or comma-separated)")->delimiter(',');
  cmd.add_flag("--speaker-across", o.speaker_across, "Default task only: speaker as ACROSS instead of BY");
  cmd.add_option("--max-a", o.max_a, "Cap on |A| per cell")->check(CLI::PositiveNumber);
  cmd.add_option("--max-b", o.max_b, "Cap on |B| per cell")->check(CLI::PositiveNumber);
  cmd.add_option("--max-x", o.max_x, "Cap on |X| per cell")->check(CLI::PositiveNumber);
  cmd.add_option("--max-across-x", o.max_across_x, "Cap on distinct ACROSS values of x")->check(CLI::PositiveNumber);
  cmd.add_option("--seed", o.seed, "Subsampling seed")->capture_default_str();
}

int cmd_run(const RunOptions& o) {
  const auto spec = task_spec(o.task);
  const auto levels = parse_levels(o);
  const auto metric = abx::parse_metric(o.metric);
  const auto mode = abx::parse_mode(o.mode);
  const bool legacy = o.legacy || abx::legacy_slicing_from_env();

  const auto labels = abx::read_item_file(o.task.item);
  spec.validate(labels);
  std::set<std::string> ids;
  for (const auto& row : labels.rows()) ids.insert(row.file);
  const std::vector<std::string> id_list(ids.begin(), ids.end());
  const auto store = abx::load_features(o.features, id_list, o.frequency);
  const auto dataset = abx::Dataset::from_item(labels, store, {legacy, true});
  if (!dataset.skipped_rows().empty())
    std::cerr << "warning: skipped " << dataset.skipped_rows().size() << " items with empty segments\n";

  const abx::Task task(dataset.labels(), spec, subsampler(o.task));
  if (task.size() == 0) throw abx::DataError("the task has no cells");
  const auto scores = abx::score_task(task, dataset, metric, mode, o.workers);

  if (!o.out.empty()) {
    std::ofstream out(o.out);
    if (!out) throw abx::IoError("cannot write " + o.out);
    abx::write_score_csv(out, scores);
  }
  if (!o.confusion.empty()) {
    std::ofstream out(o.confusion);
    if (!out) throw abx::IoError("cannot write " + o.confusion);
    out << abx::csv_field(spec.on + "_ax") << ',' << abx::csv_field(spec.on + "_b") << ",error\n";
    for (const auto& [on, err] : abx::confusion_matrix(scores))
      out << abx::csv_field(on.first) << ',' << abx::csv_field(on.second) << ',' << abx::format_decimal(err) << '\n';
  }

  const double score = (o.weighted || levels.empty()) ? abx::collapse_weighted(scores)
                                                      : abx::collapse_levels(scores, levels);
  std::cout << abx::format_decimal(1.0 - score) << '\n';
  return kOk;
}

int cmd_inspect(const TaskOptions& o) {
  const auto labels = abx::read_item_file(o.item);
  const abx::Task task(labels, task_spec(o), subsampler(o));
  std::cout << "cells: " << task.size() << '\n';
  abx::write_task_dump(std::cout, task);
  return kOk;
}

int cmd_demo(const DemoOptions& o) {
  abx::GaussianSweepConfig cfg;
  cfg.mus = o.mus;
  if (cfg.mus.empty())
    for (int i = 0; i <= 12; ++i) cfg.mus.push_back(0.25 * i);
  cfg.n_per_class = o.n_per_class;
  cfg.dim = o.dim;
  cfg.seed = o.seed;
  cfg.metric = abx::parse_metric(o.metric);
  const auto points = abx::sweep(cfg);
  if (o.out.empty()) {
    abx::write_sweep_csv(std::cout, points);
  } else {
    std::ofstream out(o.out);
    if (!out) throw abx::IoError("cannot write " + o.out);
    abx::write_sweep_csv(out, points);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ABX discriminability of learned representations"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Score an item file against pre-extracted features");
  add_task_options(*run_cmd, run.task);
  run_cmd->add_option("--features", run.features, "Feature directory")->required();
  run_cmd->add_option("--frequency", run.frequency, "Feature frame rate in Hz")->capture_default_str();
  run_cmd->add_option("--metric", run.metric, "angular | euclidean | manhattan")->capture_default_str();
  run_cmd->add_option("--mode", run.mode, "dtw | mean-pool")->capture_default_str();
  run_cmd->add_option("--levels", run.levels, "Collapse level, comma-separated attributes (repeatable, in order)")
      ->take_all();
  run_cmd->add_flag("--weighted", run.weighted, "Collapse by cell size instead of levels");
  run_cmd->add_flag("--legacy-slicing", run.legacy, "Drop the last frame of every item");
  run_cmd->add_option("--workers", run.workers, "Threads (0 = all)")->capture_default_str();
  run_cmd->add_option("--out", run.out, "Score table CSV");
  run_cmd->add_option("--confusion", run.confusion, "Confusion matrix CSV");

  TaskOptions inspect;
  auto* inspect_cmd = app.add_subcommand("inspect", "Print the cells of a task");
  add_task_options(*inspect_cmd, inspect);

  DemoOptions demo;
  auto* demo_cmd = app.add_subcommand("demo-gaussians", "ABX error between two shifted 2D Gaussians");
  demo_cmd->add_option("--mus", demo.mus, "Shifts (default 0, 0.25, ..., 3)")->delimiter(',');
  demo_cmd->add_option("--n-per-class", demo.n_per_class)->capture_default_str();
  demo_cmd->add_option("--dim", demo.dim)->capture_default_str();
  demo_cmd->add_option("--seed", demo.seed)->capture_default_str();
  demo_cmd->add_option("--metric", demo.metric)->capture_default_str();
  demo_cmd->add_option("--out", demo.out, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*inspect_cmd) return cmd_inspect(inspect);
    if (*demo_cmd) return cmd_demo(demo);
  } catch (const abx::SpecError& e) {
    std::cerr << "spec error: " << e.what() << '\n';
    return kSpec;
  } catch (const abx::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const abx::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
