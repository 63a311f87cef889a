#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "abx/errors.hpp"
#include "abx/score.hpp"
#include "oracles.hpp"

using namespace abx;

namespace {

DistanceMatrix mat(Eigen::Index rows, Eigen::Index cols, std::initializer_list<double> values) {
  DistanceMatrix m(rows, cols);
  auto it = values.begin();
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = *it++;
  return m;
}

CellScore row(std::string on_ax, std::string on_b, std::vector<std::string> by, double score, std::uint64_t n = 1) {
  CellScore r;
  r.on_ax = std::move(on_ax);
  r.on_b = std::move(on_b);
  r.by = std::move(by);
  r.score = score;
  r.n_triples = n;
  return r;
}

std::vector<FeatureMatrix> single_frames(std::mt19937_64& rng, std::size_t n, Eigen::Index dim) {
  std::normal_distribution<float> normal;
  std::vector<FeatureMatrix> out;
  for (std::size_t i = 0; i < n; ++i) {
    FeatureMatrix f(1, dim);
    for (Eigen::Index k = 0; k < dim; ++k) f(0, k) = normal(rng);
    out.push_back(f);
  }
  return out;
}

}  // namespace

TEST(ScoreCell, StrictWinIsOne) {
  const Cell cell{"p", "q", {}, {"s1"}, {"s2"}, {0}, {1}, {2}};
  const auto s = score_cell(cell, mat(1, 1, {0.1}), mat(1, 1, {0.3}));
  EXPECT_EQ(s.score, 1.0);
  EXPECT_EQ(s.n_triples, 1u);
}

TEST(ScoreCell, TieIsHalf) {
  const Cell cell{"p", "q", {}, {"s1"}, {"s2"}, {0}, {1}, {2}};
  EXPECT_EQ(score_cell(cell, mat(1, 1, {0.2}), mat(1, 1, {0.2})).score, 0.5);
  EXPECT_EQ(score_cell(cell, mat(1, 1, {0.3}), mat(1, 1, {0.1})).score, 0.0);
}

TEST(ScoreCell, SharedAXListByHand) {
  // A = X = {0, 1}, B = {2, 3}. Valid triples (a, b, x) with a != x:
  //   x=1,a=0: d_ax = 0.2 vs d_bx(2,1) = 0.5 -> 1, vs d_bx(3,1) = 0.2 -> 0.5
  //   x=0,a=1: d_ax = 0.4 vs d_bx(2,0) = 0.1 -> 0, vs d_bx(3,0) = 0.9 -> 1
  const Cell cell{"p", "q", {}, {}, {}, {0, 1}, {2, 3}, {0, 1}};
  const auto d_ax = mat(2, 2, {0.0, 0.2, 0.4, 0.0});
  const auto d_bx = mat(2, 2, {0.1, 0.5, 0.9, 0.2});
  const auto s = score_cell(cell, d_ax, d_bx);
  EXPECT_EQ(s.n_triples, 4u);
  EXPECT_EQ(s.score, 2.5 / 4.0);
}

TEST(ScoreCell, Errors) {
  const Cell cell{"p", "q", {}, {"s1"}, {"s2"}, {0}, {1}, {2}};
  EXPECT_THROW(score_cell(cell, mat(1, 2, {0, 0}), mat(1, 1, {0})), ShapeError);
  const Cell lonely{"p", "q", {}, {}, {}, {0}, {1}, {0}};
  EXPECT_THROW(score_cell(lonely, mat(1, 1, {0}), mat(1, 1, {0})), InvalidCellError);
}

TEST(ScoreCell, SwappingAAndBComplementsTheScore) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index na = 1 + rng() % 5, nb = 1 + rng() % 5, nx = 1 + rng() % 5;
    DistanceMatrix d_ax = DistanceMatrix::NullaryExpr(na, nx, [&] { return u(rng); });
    DistanceMatrix d_bx = DistanceMatrix::NullaryExpr(nb, nx, [&] { return u(rng); });
    if (trial % 2) {
      // quantize to force ties; a tie is worth one half either way round
      d_ax = d_ax.unaryExpr([](double v) { return std::round(v * 2); });
      d_bx = d_bx.unaryExpr([](double v) { return std::round(v * 2); });
    }
    Cell cell{"p", "q", {}, {"s1"}, {"s2"}, {}, {}, {}};
    for (Eigen::Index i = 0; i < na; ++i) cell.a.push_back(i);
    for (Eigen::Index i = 0; i < nb; ++i) cell.b.push_back(100 + i);
    for (Eigen::Index i = 0; i < nx; ++i) cell.x.push_back(200 + i);
    Cell swapped = cell;
    std::swap(swapped.a, swapped.b);

    const double s = score_cell(cell, d_ax, d_bx).score;
    const double s_swapped = score_cell(swapped, d_bx, d_ax).score;
    EXPECT_NEAR(s_swapped, 1.0 - s, 1e-15);
  }
}

TEST(CollapseWeighted, Arithmetic) {
  ScoreTable t{{"c", {}, {}}, {row("p", "q", {}, 1.0, 1), row("q", "p", {}, 0.0, 3)}};
  EXPECT_EQ(collapse_weighted(t), 0.25);
}

TEST(CollapseWeighted, ConstantScores) {
  ScoreTable t{{"c", {"s"}, {}}, {}};
  for (int i = 0; i < 7; ++i) t.rows.push_back(row("p", "q", {std::to_string(i)}, 0.375, 1 + i));
  EXPECT_EQ(collapse_weighted(t), 0.375);
  EXPECT_EQ(collapse_levels(t, {{"s"}}), 0.375);
  EXPECT_EQ(collapse_levels(t, {}), 0.375);
}

TEST(CollapseWeighted, EmptyTableFails) {
  const ScoreTable t{{"c", {}, {}}, {}};
  EXPECT_THROW(collapse_weighted(t), DataError);
  EXPECT_THROW(collapse_levels(t, {}), DataError);
  EXPECT_THROW(confusion_matrix(t), DataError);
}

TEST(CollapseWeighted, EqualsTripleLevelOracle) {
  std::mt19937_64 rng(2);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    auto [labels, spec] = oracle::random_task(rng);
    if (oracle::valid_triples(labels, spec).empty()) continue;
    const auto frames = single_frames(rng, labels.size(), 3);
    const auto data = Dataset::from_arrays(labels, frames);
    const Task task(data.labels(), spec);
    const auto table = score_task(task, data, FrameMetric::euclidean, DistanceMode::dtw);
    EXPECT_NEAR(collapse_weighted(table), oracle::triple_level_score(labels, spec, frames), 1e-12);
    for (const auto& r : table.rows) {
      EXPECT_GE(r.score, 0.0);
      EXPECT_LE(r.score, 1.0);
    }
    ++checked;
  }
  EXPECT_GT(checked, 50);
}

TEST(CollapseLevels, FourCellExample) {
  ScoreTable t{{"phone", {"speaker"}, {}},
               {row("p", "q", {"s1"}, 0.0), row("p", "q", {"s2"}, 1.0), row("q", "p", {"s1"}, 0.5),
                row("q", "p", {"s2"}, 0.5)}};
  EXPECT_EQ(collapse_levels(t, {{"speaker"}}), 0.5);
}

TEST(CollapseLevels, OrderOfLevelsMatters) {
  // p/q: context c1 has three speakers, c2 one. Averaging context first gives
  // a different weight to speaker s3 than averaging speakers first.
  ScoreTable t{{"phone", {"ctx", "speaker"}, {}},
               {row("p", "q", {"c1", "s1"}, 1.0), row("p", "q", {"c1", "s2"}, 1.0), row("p", "q", {"c1", "s3"}, 1.0),
                row("p", "q", {"c2", "s3"}, 0.0)}};
  // ctx first: s1 -> 1, s2 -> 1, s3 -> 0.5; then speakers -> 2.5/3
  EXPECT_DOUBLE_EQ(collapse_levels(t, {{"ctx"}, {"speaker"}}), 2.5 / 3.0);
  // speaker first: c1 -> 1, c2 -> 0; then contexts -> 0.5
  EXPECT_EQ(collapse_levels(t, {{"speaker"}, {"ctx"}}), 0.5);
  // both at once: plain mean over the four cells
  EXPECT_EQ(collapse_levels(t, {{"ctx", "speaker"}}), 0.75);
  // unnamed keys fall into the final per-pair average
  EXPECT_EQ(collapse_levels(t, {}), 0.75);
}

TEST(CollapseLevels, AcrossKeysUseBothValues) {
  ScoreTable t{{"phone", {}, {"speaker"}}, {}};
  auto add = [&](std::string ab, std::string x, double s) {
    auto r = row("p", "q", {}, s);
    r.across_ab = {std::move(ab)};
    r.across_x = {std::move(x)};
    t.rows.push_back(r);
  };
  add("s1", "s2", 1.0);
  add("s1", "s3", 0.0);
  add("s2", "s1", 0.5);
  EXPECT_EQ(collapse_levels(t, {{"speaker"}}), 0.5);
}

TEST(CollapseLevels, SingleCellIgnoresLevels) {
  const ScoreTable t{{"phone", {"a", "b"}, {}}, {row("p", "q", {"1", "2"}, 0.8125)}};
  EXPECT_EQ(collapse_levels(t, {{"a"}, {"b"}}), 0.8125);
  EXPECT_EQ(collapse_levels(t, {{"b", "a"}}), 0.8125);
}

TEST(CollapseLevels, RejectsBadLevels) {
  const ScoreTable t{{"phone", {"a", "b"}, {}}, {row("p", "q", {"1", "2"}, 0.5)}};
  EXPECT_THROW(collapse_levels(t, {{"phone"}}), SpecError);
  EXPECT_THROW(collapse_levels(t, {{"zzz"}}), SpecError);
  EXPECT_THROW(collapse_levels(t, {{"a"}, {"a", "b"}}), SpecError);
  EXPECT_THROW(collapse_levels(t, {{}}), SpecError);
}

TEST(CollapseLevels, OutputsStayInUnitInterval) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u;
  for (int trial = 0; trial < 100; ++trial) {
    ScoreTable t{{"phone", {"a", "b"}, {}}, {}};
    const int n = 1 + rng() % 20;
    for (int i = 0; i < n; ++i)
      t.rows.push_back(row(rng() % 2 ? "p" : "q", "r", {std::to_string(rng() % 3), std::to_string(rng() % 3)}, u(rng),
                           1 + rng() % 9));
    for (const auto& levels : std::vector<std::vector<Level>>{{}, {{"a"}}, {{"a"}, {"b"}}, {{"b", "a"}}}) {
      const double v = collapse_levels(t, levels);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(ConfusionMatrix, PerfectTaskIsZero) {
  const ScoreTable t{{"phone", {"s"}, {}},
                     {row("p", "q", {"1"}, 1.0), row("q", "p", {"1"}, 1.0), row("p", "q", {"2"}, 1.0)}};
  const auto m = confusion_matrix(t);
  EXPECT_EQ(m.size(), 2u);
  for (const auto& [on, err] : m) {
    EXPECT_NE(on.first, on.second);
    EXPECT_EQ(err, 0.0);
  }
}

TEST(ConfusionMatrix, MatchesLevelsOnOnePair) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u;
  ScoreTable t{{"phone", {"a", "b"}, {}}, {}};
  for (int i = 0; i < 30; ++i)
    t.rows.push_back(row(i % 2 ? "p" : "q", i % 3 ? "r" : "t", {std::to_string(i % 4), std::to_string(i % 5)}, u(rng)));
  const auto m = confusion_matrix(t);
  for (const auto& [on, err] : m) {
    ScoreTable only{t.spec, {}};
    for (const auto& r : t.rows)
      if (r.on_ax == on.first && r.on_b == on.second) only.rows.push_back(r);
    EXPECT_NEAR(err, 1.0 - collapse_levels(only, {{"a", "b"}}), 1e-15);
  }
}

TEST(Symmetrize, AveragesBothDirections) {
  const std::map<OnPair, double> m{{{"q", "p"}, 0.4}, {{"p", "q"}, 0.2}, {{"p", "r"}, 0.7}};
  const auto s = symmetrize(m);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_DOUBLE_EQ(s.at({"p", "q"}), 0.3);
  EXPECT_EQ(s.at({"p", "r"}), 0.7);
  EXPECT_EQ(symmetrize(s), s);
  EXPECT_EQ(symmetrize({{{"z", "a"}, 0.9}}).at({"a", "z"}), 0.9);
}

TEST(ScoreTask, IdenticalAcrossWorkerCounts) {
  std::mt19937_64 rng(5);
  LabelTable labels({"phone", "speaker"});
  std::vector<FeatureMatrix> segs;
  std::normal_distribution<float> normal;
  for (int i = 0; i < 60; ++i) {
    labels.add_row({"f", 0.0, 1.0, {std::string(1, char('a' + i % 3)), "s" + std::to_string(i % 4)}});
    FeatureMatrix m(1 + rng() % 5, 4);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = normal(rng);
    segs.push_back(m);
  }
  const auto data = Dataset::from_arrays(labels, segs);
  const Task task(data.labels(), {"phone", {}, {"speaker"}});
  std::ostringstream one, many;
  write_score_csv(one, score_task(task, data, FrameMetric::angular, DistanceMode::dtw, 1));
  write_score_csv(many, score_task(task, data, FrameMetric::angular, DistanceMode::dtw, 4));
  EXPECT_EQ(one.str(), many.str());
}

TEST(ScoreTask, ScaleInvariance) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    auto [labels, spec] = oracle::random_task(rng);
    if (oracle::valid_triples(labels, spec).empty()) continue;
    const auto frames = single_frames(rng, labels.size(), 3);
    auto scaled = frames;
    for (auto& f : scaled) f *= 4.0f;
    const auto base = Dataset::from_arrays(labels, frames);
    const auto big = Dataset::from_arrays(labels, scaled);
    const Task task(labels, spec);
    for (auto m : {FrameMetric::angular, FrameMetric::euclidean, FrameMetric::manhattan}) {
      const auto s0 = score_task(task, base, m, DistanceMode::dtw);
      const auto s1 = score_task(task, big, m, DistanceMode::dtw);
      for (std::size_t i = 0; i < s0.rows.size(); ++i) EXPECT_EQ(s0.rows[i].score, s1.rows[i].score);
    }
  }
}

TEST(ScoreCsv, HeaderAndRows) {
  TaskSpec spec{"#phone", {"speaker"}, {"ctx"}};
  CellScore r = row("a,b", "c", {"s1"}, 0.5, 4);
  r.across_ab = {"l"};
  r.across_x = {"m"};
  std::ostringstream out;
  write_score_csv(out, {spec, {r}});
  EXPECT_EQ(out.str(), "#phone_ax,#phone_b,speaker,ctx_ab,ctx_x,score,n_triples\n\"a,b\",c,s1,l,m,0.5,4\n");
}
