#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "truckloc/error.hpp"
#include "truckloc/metrics.hpp"

namespace truckloc {
namespace {

Corners random_corners(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  Corners c;
  for (auto& p : c) p = Vec3(u(rng), u(rng), u(rng));
  return c;
}

// All relabelings among the 8! permutations that keep the bottom ring on the
// bottom, the top ring above it, and ring adjacency intact.
std::vector<std::array<int, 8>> brute_symmetries() {
  std::vector<std::array<int, 8>> out;
  std::array<int, 8> perm;
  std::iota(perm.begin(), perm.end(), 0);
  do {
    bool ok = true;
    for (int i = 0; i < 4 && ok; ++i) {
      ok = perm[i] < 4 && perm[i + 4] == perm[i] + 4;
      const int d = ((perm[(i + 1) % 4] - perm[i]) % 4 + 4) % 4;
      ok = ok && (d == 1 || d == 3);
    }
    if (ok) out.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

double brute_add(const Corners& p, const Corners& q, const std::vector<std::array<int, 8>>& syms) {
  double best = 1e300;
  for (const auto& s : syms) {
    double sum = 0.0;
    for (int i = 0; i < 8; ++i) sum += (p[i] - q[s[i]]).norm();
    best = std::min(best, sum / 8.0);
  }
  return best;
}

TEST(Add, IdentityAndUniformOffset) {
  std::mt19937_64 rng(1);
  const Corners p = random_corners(rng);
  EXPECT_EQ(add_metric(p, p), 0.0);
  Corners q = p;
  for (auto& x : q) x += Vec3(0.1, 0.0, 0.0);
  EXPECT_NEAR(add_metric(p, q), 0.1, 1e-15);
}

TEST(Add, WrongCardinalityThrows) {
  std::vector<Vec3> seven(7, Vec3::Zero()), eight(8, Vec3::Zero());
  EXPECT_THROW(add_metric(seven, eight), Error);
  EXPECT_THROW(add_metric(eight, seven), Error);
}

TEST(Add, SymmetryTableIsTheBoxGroup) {
  const auto brute = brute_symmetries();
  ASSERT_EQ(brute.size(), 8u);
  const auto table = box_label_symmetries();
  std::set<std::array<int, 8>> a(table.begin(), table.end()), b(brute.begin(), brute.end());
  EXPECT_EQ(a, b);
}

TEST(Add, MatchesExhaustiveOrdering) {
  const auto syms = brute_symmetries();
  std::mt19937_64 rng(2);
  for (int i = 0; i < 300; ++i) {
    const Corners p = random_corners(rng);
    const Corners q = random_corners(rng);
    EXPECT_EQ(add_metric(p, q), brute_add(p, q, syms));
  }
}

TEST(Add, RelabeledTruthScoresZero) {
  std::mt19937_64 rng(3);
  const Corners p = random_corners(rng);
  for (const auto& s : box_label_symmetries()) {
    Corners q;
    for (int i = 0; i < 8; ++i) q[i] = p[s[i]];
    EXPECT_EQ(add_metric(p, q), 0.0);
  }
}

TEST(Add, MetricProperties) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> a(-kPi, kPi);
  for (int i = 0; i < 200; ++i) {
    const Corners p = random_corners(rng), q = random_corners(rng), r = random_corners(rng);
    EXPECT_NEAR(add_metric(p, q), add_metric(q, p), 1e-12);
    EXPECT_GT(add_metric(p, q), 0.0);
    EXPECT_LE(add_metric(p, r), add_metric(p, q) + add_metric(q, r) + 1e-12);
    const RigidTransform m(euler_to_rotation({a(rng), a(rng) / 2, a(rng)}), {a(rng), a(rng), a(rng)});
    Corners mp, mq;
    for (int k = 0; k < 8; ++k) {
      mp[k] = m * p[k];
      mq[k] = m * q[k];
    }
    EXPECT_NEAR(add_metric(mp, mq), add_metric(p, q), 1e-12);
  }
}

TEST(Threshold, Examples) {
  EXPECT_NEAR(success_threshold({12.0, 2.4, 2.7}, 0.05), 0.285, 1e-15);
  EXPECT_NEAR(success_threshold({1.0, 1.0, 1.0}, 0.10), 0.1, 1e-15);
  EXPECT_EQ(success_threshold({12.0, 2.4, 2.7}, 0.0), 0.0);
}

Annotation annotation(const std::string& id, const std::string& cls, const Vec3& dims) {
  Annotation a;
  a.id = id;
  a.size_class = cls;
  a.dims = dims;
  const Vec3 o(2.0, 1.0, 0.5);
  a.points = {o,
              o + Vec3(dims.x(), 0, 0),
              o + Vec3(dims.x(), dims.y(), 0),
              o + Vec3(0, dims.y(), 0),
              o + Vec3(0, 0, dims.z()),
              o + Vec3(dims.x(), 0, dims.z()),
              o + Vec3(dims.x(), dims.y(), dims.z()),
              o + Vec3(0, dims.y(), dims.z())};
  return a;
}

TEST(Batch, PerfectPredictionsPassEverywhere) {
  std::vector<Annotation> truth;
  std::vector<Prediction> pred;
  for (int i = 0; i < 5; ++i) {
    truth.push_back(annotation("t" + std::to_string(i), i % 2 ? "large" : "small", {6.0 + i, 2.3, 1.2}));
    pred.push_back({truth.back().id, truth.back().points, 0.5});
  }
  const EvalReport r = evaluate_batch(pred, truth);
  const Summary& all = r.by_class.at("all");
  EXPECT_EQ(all.count, 5u);
  EXPECT_EQ(all.pass5, 1.0);
  EXPECT_EQ(all.pass7, 1.0);
  EXPECT_EQ(all.pass10, 1.0);
  EXPECT_EQ(all.mean, 0.0);
  EXPECT_EQ(r.by_class.at("large").count, 2u);
  EXPECT_EQ(r.by_class.at("small").count, 3u);
}

TEST(Batch, MatchesIndependentRecomputation) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> off(0.0, 0.9), len(5.0, 13.0), rt(0.3, 1.2);
  std::vector<Annotation> truth;
  std::vector<Prediction> pred;
  std::vector<double> rel, runtimes;
  int p5 = 0, p7 = 0, p10 = 0;
  for (int i = 0; i < 20; ++i) {
    const Vec3 dims(len(rng), 2.4, 2.7);
    truth.push_back(annotation("v" + std::to_string(i), "large", dims));
    const double d = off(rng);
    Prediction p{truth.back().id, truth.back().points, rt(rng)};
    for (auto& x : p.points) x += Vec3(0, 0, d);
    pred.push_back(p);
    const double mean_dim = (dims.x() + 2.4 + 2.7) / 3.0;
    rel.push_back(d / mean_dim * 100.0);
    runtimes.push_back(p.runtime_s);
    p5 += d < 0.05 * mean_dim;
    p7 += d < 0.07 * mean_dim;
    p10 += d < 0.10 * mean_dim;
  }
  const EvalReport r = evaluate_batch(pred, truth);
  const Summary& s = r.by_class.at("large");
  const double n = 20.0;
  double mean = 0.0;
  for (double x : rel) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : rel) ss += (x - mean) * (x - mean);
  std::vector<double> sorted = rel;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_NEAR(s.mean, mean, 1e-12);
  EXPECT_NEAR(s.sd, std::sqrt(ss / (n - 1.0)), 1e-12);
  EXPECT_NEAR(s.min, sorted.front(), 1e-12);
  EXPECT_NEAR(s.max, sorted.back(), 1e-12);
  EXPECT_NEAR(s.median, 0.5 * (sorted[9] + sorted[10]), 1e-12);
  EXPECT_NEAR(s.pass5, p5 / n, 1e-15);
  EXPECT_NEAR(s.pass7, p7 / n, 1e-15);
  EXPECT_NEAR(s.pass10, p10 / n, 1e-15);
  EXPECT_NEAR(s.mean_runtime_s, std::accumulate(runtimes.begin(), runtimes.end(), 0.0) / n, 1e-12);
  for (const auto& v : r.vehicles) {
    EXPECT_TRUE(!v.pass5 || v.pass7);
    EXPECT_TRUE(!v.pass7 || v.pass10);
  }
}

TEST(Batch, UnmatchedIdsAreListed) {
  std::vector<Annotation> truth{annotation("a", "small", {5, 2, 1}), annotation("b", "small", {5, 2, 1})};
  std::vector<Prediction> pred{{"a", truth[0].points, 0.1}, {"z", truth[0].points, 0.1}};
  const EvalReport r = evaluate_batch(pred, truth);
  EXPECT_EQ(r.vehicles.size(), 1u);
  EXPECT_EQ(r.missing_annotation, std::vector<std::string>{"z"});
  EXPECT_EQ(r.missing_prediction, std::vector<std::string>{"b"});
  EXPECT_NE(render_table(r).find("all"), std::string::npos);
}

}  // namespace
}  // namespace truckloc
