#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "abx/distance.hpp"

namespace abx {

/// Two isotropic Gaussians, N(0, I) and N((mu, ..., mu), I), sampled at
/// each shift in `mus`.
struct GaussianSweepConfig {
  std::vector<double> mus;
  std::size_t n_per_class = 50;
  std::size_t dim = 2;
  std::uint64_t seed = 0;
  FrameMetric metric = FrameMetric::euclidean;

  /// Throws SpecError unless n_per_class >= 2, dim >= 1 and mus are
  /// non-negative and ascending.
  void validate() const;
};

/// ABX error rate ON the class label, one single-frame item per sample.
/// The sample stream is keyed by (seed, mu).
double gaussian_abx(double mu, const GaussianSweepConfig& cfg);

struct SweepPoint {
  double mu;
  double error;
};

std::vector<SweepPoint> sweep(const GaussianSweepConfig& cfg);

/// `mu,error` header, then one row per point.
void write_sweep_csv(std::ostream& out, std::span<const SweepPoint> points);

}  // namespace abx
