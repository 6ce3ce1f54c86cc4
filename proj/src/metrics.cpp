#include "truckloc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "truckloc/error.hpp"

namespace truckloc {

void Annotation::validate() const {
  if (!(dims.array() > 0.0).all()) throw Error(ErrorCode::kInvalidArgument, "annotation " + id + ": dims must be > 0");
  for (const auto& p : points) {
    if (!p.allFinite()) throw Error(ErrorCode::kInvalidArgument, "annotation " + id + ": non-finite corner");
  }
}

std::array<std::array<int, 8>, 8> box_label_symmetries() {
  std::array<std::array<int, 8>, 8> out{};
  std::size_t k = 0;
  for (int reflect = 0; reflect < 2; ++reflect) {
    for (int shift = 0; shift < 4; ++shift) {
      for (int i = 0; i < 4; ++i) {
        const int j = reflect ? ((shift - i) % 4 + 4) % 4 : (shift + i) % 4;
        out[k][static_cast<std::size_t>(i)] = j;
        out[k][static_cast<std::size_t>(i + 4)] = j + 4;
      }
      ++k;
    }
  }
  return out;
}

double add_metric(std::span<const Vec3> p, std::span<const Vec3> q) {
  if (p.size() != 8 || q.size() != 8) {
    throw Error(ErrorCode::kInvalidArgument, "ADD needs exactly 8 points per set");
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& perm : box_label_symmetries()) {
    double sum = 0.0;
    for (std::size_t i = 0; i < 8; ++i) sum += (p[i] - q[static_cast<std::size_t>(perm[i])]).norm();
    best = std::min(best, sum / 8.0);
  }
  return best;
}

double success_threshold(const Vec3& dims, double pct) { return dims.sum() / 3.0 * pct; }

Summary summarize(const std::vector<VehicleEval>& vehicles) {
  Summary s;
  s.count = vehicles.size();
  if (vehicles.empty()) return s;
  std::vector<double> e;
  double runtime = 0.0;
  for (const auto& v : vehicles) {
    e.push_back(v.relative_error_pct);
    s.pass5 += v.pass5;
    s.pass7 += v.pass7;
    s.pass10 += v.pass10;
    runtime += v.runtime_s;
  }
  const auto n = static_cast<double>(e.size());
  s.pass5 /= n;
  s.pass7 /= n;
  s.pass10 /= n;
  s.mean_runtime_s = runtime / n;
  double sum = 0.0;
  for (double x : e) sum += x;
  s.mean = sum / n;
  double ss = 0.0;
  for (double x : e) ss += (x - s.mean) * (x - s.mean);
  s.sd = e.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  std::sort(e.begin(), e.end());
  s.min = e.front();
  s.max = e.back();
  const std::size_t m = e.size() / 2;
  s.median = e.size() % 2 ? e[m] : 0.5 * (e[m - 1] + e[m]);
  return s;
}

EvalReport evaluate_batch(const std::vector<Prediction>& predictions, const std::vector<Annotation>& annotations) {
  EvalReport report;
  std::map<std::string, const Annotation*> by_id;
  for (const auto& a : annotations) by_id[a.id] = &a;
  std::map<std::string, bool> seen;
  for (const auto& p : predictions) {
    const auto it = by_id.find(p.id);
    if (it == by_id.end()) {
      report.missing_annotation.push_back(p.id);
      continue;
    }
    seen[p.id] = true;
    const Annotation& a = *it->second;
    VehicleEval v;
    v.id = p.id;
    v.size_class = a.size_class;
    v.add = add_metric(p.points, a.points);
    v.relative_error_pct = v.add / (a.dims.sum() / 3.0) * 100.0;
    v.pass5 = v.add < success_threshold(a.dims, 0.05);
    v.pass7 = v.add < success_threshold(a.dims, 0.07);
    v.pass10 = v.add < success_threshold(a.dims, 0.10);
    v.runtime_s = p.runtime_s;
    report.vehicles.push_back(v);
  }
  for (const auto& a : annotations) {
    if (!seen.count(a.id)) report.missing_prediction.push_back(a.id);
  }
  std::map<std::string, std::vector<VehicleEval>> groups;
  for (const auto& v : report.vehicles) {
    groups[v.size_class].push_back(v);
    groups["all"].push_back(v);
  }
  for (const auto& [cls, vs] : groups) report.by_class[cls] = summarize(vs);
  return report;
}

std::string render_table(const EvalReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-8s %5s %8s %8s %8s %8s %8s %7s %7s %7s %9s\n", "class", "n", "mean%", "sd%",
                "min%", "median%", "max%", "ADD5", "ADD7", "ADD10", "time(s)");
  out << line;
  for (const char* cls : {"large", "medium", "small", "all"}) {
    const auto it = report.by_class.find(cls);
    if (it == report.by_class.end()) continue;
    const Summary& s = it->second;
    std::snprintf(line, sizeof line, "%-8s %5zu %8.2f %8.2f %8.2f %8.2f %8.2f %7.2f %7.2f %7.2f %9.2f\n", cls,
                  s.count, s.mean, s.sd, s.min, s.median, s.max, s.pass5, s.pass7, s.pass10, s.mean_runtime_s);
    out << line;
  }
  return out.str();
}

}  // namespace truckloc
