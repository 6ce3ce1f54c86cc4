#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "truckloc/geometry.hpp"

namespace truckloc {

using Corners = std::array<Vec3, 8>;

struct Annotation {
  std::string id;
  Corners points;
  Vec3 dims = Vec3::Zero();  // l, w, h
  std::string size_class;    // large | medium | small

  void validate() const;
};

/// The 8 relabelings of a box that keep the bottom/top split: 4 cyclic shifts of
/// the face ring, each with or without reversal; applied identically to both faces.
std::array<std::array<int, 8>, 8> box_label_symmetries();

/// Mean corner distance under the best of the 8 label symmetries.
double add_metric(std::span<const Vec3> p, std::span<const Vec3> q);

/// ((l + w + h) / 3) * pct, pct as a fraction.
double success_threshold(const Vec3& dims, double pct);

struct Prediction {
  std::string id;
  Corners points;
  double runtime_s = 0.0;
};

struct VehicleEval {
  std::string id;
  std::string size_class;
  double add = 0.0;
  double relative_error_pct = 0.0;
  bool pass5 = false, pass7 = false, pass10 = false;
  double runtime_s = 0.0;
};

struct Summary {
  std::size_t count = 0;
  double mean = 0.0, sd = 0.0, min = 0.0, median = 0.0, max = 0.0;  // relative error, %
  double pass5 = 0.0, pass7 = 0.0, pass10 = 0.0;                    // rates
  double mean_runtime_s = 0.0;
};

struct EvalReport {
  std::vector<VehicleEval> vehicles;
  std::map<std::string, Summary> by_class;  // includes "all"
  std::vector<std::string> missing_annotation;
  std::vector<std::string> missing_prediction;
};

/// Sample statistics (n - 1 denominator for the SD).
Summary summarize(const std::vector<VehicleEval>& vehicles);

/// Pairs predictions with annotations by id; unmatched ids are listed, not fatal.
EvalReport evaluate_batch(const std::vector<Prediction>& predictions, const std::vector<Annotation>& annotations);

/// Fixed-width table with one row per class plus "all".
std::string render_table(const EvalReport& report);

}  // namespace truckloc
