#include "abx/experiments.hpp"

#include <bit>
#include <cmath>
#include <ostream>

#include "abx/format.hpp"
#include "abx/random.hpp"
#include "abx/score.hpp"

namespace abx {

void GaussianSweepConfig::validate() const {
  if (n_per_class < 2) throw SpecError("n_per_class must be at least 2");
  if (dim < 1) throw SpecError("dim must be at least 1");
  for (std::size_t i = 0; i < mus.size(); ++i) {
    if (!(mus[i] >= 0.0) || !std::isfinite(mus[i])) throw SpecError("shifts must be finite and non-negative");
    if (i > 0 && mus[i] < mus[i - 1]) throw SpecError("shifts must be sorted ascending");
  }
}

double gaussian_abx(double mu, const GaussianSweepConfig& cfg) {
  cfg.validate();
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw SpecError("shift must be finite and non-negative");

  NormalStream normal(combine_keys(cfg.seed, std::bit_cast<std::uint64_t>(mu)));
  const auto dim = static_cast<Eigen::Index>(cfg.dim);

  LabelTable labels({"class"});
  std::vector<FeatureMatrix> segments;
  segments.reserve(2 * cfg.n_per_class);
  for (int label = 0; label < 2; ++label) {
    const double shift = label == 0 ? 0.0 : mu;
    for (std::size_t i = 0; i < cfg.n_per_class; ++i) {
      FeatureMatrix frame(1, dim);
      for (Eigen::Index d = 0; d < dim; ++d) frame(0, d) = static_cast<float>(shift + normal());
      segments.push_back(std::move(frame));
      labels.add_row(ItemRecord{"", 0.0, 0.0, {std::to_string(label)}});
    }
  }
  const Dataset dataset = Dataset::from_arrays(std::move(labels), std::move(segments));
  const Task task(dataset.labels(), TaskSpec{"class", {}, {}});
  const ScoreTable scores = score_task(task, dataset, cfg.metric, DistanceMode::dtw);
  return 1.0 - collapse_weighted(scores);
}

std::vector<SweepPoint> sweep(const GaussianSweepConfig& cfg) {
  cfg.validate();
  std::vector<SweepPoint> points(cfg.mus.size());
  const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) points[i] = {cfg.mus[i], gaussian_abx(cfg.mus[i], cfg)};
  return points;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points) {
  out << "mu,error\n";
  for (const auto& p : points) out << format_decimal(p.mu) << ',' << format_decimal(p.error) << '\n';
}

}  // namespace abx
