#include "truckloc/calibration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "truckloc/error.hpp"
#include "truckloc/plane_fit.hpp"

namespace truckloc {
namespace {

Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(),
       v.z(), 0, -v.x(),
       -v.y(), v.x(), 0;
  return m;
}

// dR/d(roll), dR/d(pitch), dR/d(yaw) for R = Rz Ry Rx.
std::array<Mat3, 3> euler_derivatives(const EulerAngles& w) {
  const Mat3 rx = rotation_x(w.roll), ry = rotation_y(w.pitch), rz = rotation_z(w.yaw);
  return {rz * ry * rx * skew(Vec3::UnitX()), rz * ry * skew(Vec3::UnitY()) * rx, rz * skew(Vec3::UnitZ()) * ry * rx};
}

void require_planes(std::span<const PlaneDataset> datasets) {
  for (const auto& d : datasets) {
    if (!d.plane) {
      throw Error(ErrorCode::kInvalidArgument, "plane dataset " + std::to_string(d.id) + " has no fitted plane");
    }
  }
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

}  // namespace

void PlaneDataset::validate() const {
  if (samples.size() < 20) {
    throw Error(ErrorCode::kInvalidArgument,
                "plane dataset " + std::to_string(id) + " has " + std::to_string(samples.size()) + " samples (< 20)");
  }
  std::set<double> phis;
  for (const auto& s : samples) phis.insert(s.platform_angle);
  if (phis.size() < 2) {
    throw DegeneracyError("plane dataset " + std::to_string(id) + " spans a single platform angle",
                          {"plane " + std::to_string(id)});
  }
}

std::vector<ScanLineDirection> scan_line_directions(const PlaneDataset& dataset, std::size_t min_support) {
  std::map<double, std::vector<Eigen::Vector2d>> by_line;
  for (const auto& s : dataset.samples) {
    const Vec3 q = polar_to_lidar_point(s.range, s.azimuth);
    by_line[s.platform_angle].emplace_back(q.x(), q.y());
  }
  std::vector<ScanLineDirection> out;
  for (const auto& [phi, pts] : by_line) {
    if (pts.size() < std::max<std::size_t>(min_support, 2)) continue;
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& p : pts) mean += p;
    mean /= static_cast<double>(pts.size());
    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const auto& p : pts) cov += (p - mean) * (p - mean).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
    if (!(eig.eigenvalues()[1] > 0.0)) continue;
    Eigen::Vector2d v = eig.eigenvectors().col(1);
    if (v.x() < 0.0 || (v.x() == 0.0 && v.y() < 0.0)) v = -v;
    out.push_back({phi, Vec3(v.x(), v.y(), 0.0), pts.size(), std::sqrt(eig.eigenvalues()[1])});
  }
  return out;
}

RotationalCostFunction::RotationalCostFunction(std::span<const PlaneDataset> datasets) {
  require_planes(datasets);
  for (const auto& d : datasets) {
    const std::size_t index = planes_.size();
    const Vec3 n0 = d.plane->normal.normalized();
    const auto [e1, e2] = orthonormal_basis(n0);
    planes_.push_back({d.id, n0, e1, e2});
    for (const auto& line : scan_line_directions(d)) {
      lines_.push_back({index, platform_rotation(line.platform_angle), line.direction, line.spread});
    }
  }
}

Eigen::VectorXd RotationalCostFunction::initial_parameters(const EulerAngles& w) const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_parameters()));
  x[0] = w.roll;
  x[1] = w.pitch;
  x[2] = w.yaw;
  return x;
}

Vec3 RotationalCostFunction::normal(const Eigen::VectorXd& x, std::size_t plane) const {
  const auto& b = planes_[plane];
  const auto k = static_cast<Eigen::Index>(3 + 2 * plane);
  return (b.n0 + x[k] * b.e1 + x[k + 1] * b.e2).normalized();
}

Eigen::VectorXd RotationalCostFunction::residuals(const Eigen::VectorXd& x) const {
  const Mat3 rw = euler_to_rotation(angles(x));
  std::vector<Vec3> normals(planes_.size());
  for (std::size_t j = 0; j < planes_.size(); ++j) normals[j] = normal(x, j);
  Eigen::VectorXd r(static_cast<Eigen::Index>(lines_.size()));
  for (std::size_t i = 0; i < lines_.size(); ++i) {
    const auto& l = lines_[i];
    r[static_cast<Eigen::Index>(i)] = l.weight * (l.q * (rw * l.d)).dot(normals[l.plane]);
  }
  return r;
}

Eigen::MatrixXd RotationalCostFunction::jacobian(const Eigen::VectorXd& x) const {
  const Mat3 rw = euler_to_rotation(angles(x));
  const auto drw = euler_derivatives(angles(x));
  std::vector<Vec3> normals(planes_.size());
  std::vector<Vec3> dn_da(planes_.size()), dn_db(planes_.size());
  for (std::size_t j = 0; j < planes_.size(); ++j) {
    const auto& b = planes_[j];
    const auto k = static_cast<Eigen::Index>(3 + 2 * j);
    const Vec3 v = b.n0 + x[k] * b.e1 + x[k + 1] * b.e2;
    const double len = v.norm();
    const Vec3 n = v / len;
    const Mat3 proj = (Mat3::Identity() - n * n.transpose()) / len;
    normals[j] = n;
    dn_da[j] = proj * b.e1;
    dn_db[j] = proj * b.e2;
  }
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(lines_.size()),
                                              static_cast<Eigen::Index>(num_parameters()));
  for (std::size_t i = 0; i < lines_.size(); ++i) {
    const auto& l = lines_[i];
    const auto row = static_cast<Eigen::Index>(i);
    const Vec3 qtn = l.q.transpose() * normals[l.plane];
    for (int a = 0; a < 3; ++a) jac(row, a) = l.weight * (drw[static_cast<std::size_t>(a)] * l.d).dot(qtn);
    const Vec3 dir = l.weight * (l.q * (rw * l.d));
    const auto k = static_cast<Eigen::Index>(3 + 2 * l.plane);
    jac(row, k) = dir.dot(dn_da[l.plane]);
    jac(row, k + 1) = dir.dot(dn_db[l.plane]);
  }
  return jac;
}

std::vector<std::string> RotationalCostFunction::parameter_names() const {
  std::vector<std::string> names{"roll", "pitch", "yaw"};
  for (const auto& p : planes_) {
    names.push_back("plane " + std::to_string(p.id) + " normal (a)");
    names.push_back("plane " + std::to_string(p.id) + " normal (b)");
  }
  return names;
}

TranslationalCostFunction::TranslationalCostFunction(std::span<const PlaneDataset> datasets, const EulerAngles& w) {
  require_planes(datasets);
  const Mat3 rw = euler_to_rotation(w);
  for (const auto& d : datasets) {
    const std::size_t begin = rows_.size();
    const Vec3 n = d.plane->normal.normalized();
    for (const auto& s : d.samples) {
      const Mat3 q = platform_rotation(s.platform_angle);
      const Vec3 a = q.transpose() * n;
      rows_.push_back({a, (rw * polar_to_lidar_point(s.range, s.azimuth)).dot(a)});
    }
    ranges_.emplace_back(begin, rows_.size());
  }
}

Eigen::VectorXd TranslationalCostFunction::residuals(const Eigen::VectorXd& t) const {
  const Vec3 tv(t[0], t[1], t[2]);
  Eigen::VectorXd r(static_cast<Eigen::Index>(rows_.size()));
  for (const auto& [begin, end] : ranges_) {
    if (begin == end) continue;
    double mu = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      const double v = rows_[i].a.dot(tv) + rows_[i].c;
      r[static_cast<Eigen::Index>(i)] = v;
      mu += v;
    }
    mu /= static_cast<double>(end - begin);
    for (std::size_t i = begin; i < end; ++i) r[static_cast<Eigen::Index>(i)] -= mu;
  }
  return r;
}

Eigen::MatrixXd TranslationalCostFunction::jacobian(const Eigen::VectorXd&) const {
  Eigen::MatrixXd jac(static_cast<Eigen::Index>(rows_.size()), 3);
  for (const auto& [begin, end] : ranges_) {
    if (begin == end) continue;
    Vec3 mean = Vec3::Zero();
    for (std::size_t i = begin; i < end; ++i) mean += rows_[i].a;
    mean /= static_cast<double>(end - begin);
    for (std::size_t i = begin; i < end; ++i) jac.row(static_cast<Eigen::Index>(i)) = (rows_[i].a - mean).transpose();
  }
  return jac;
}

Eigen::VectorXd rotational_cost(const EulerAngles& w, std::span<const PlaneDataset> datasets) {
  RotationalCostFunction f(datasets);
  return f.residuals(f.initial_parameters(w));
}

Eigen::VectorXd translational_cost(const Vec3& t, std::span<const PlaneDataset> datasets, const EulerAngles& w) {
  return TranslationalCostFunction(datasets, w).residuals(Eigen::Vector3d(t));
}

std::vector<PlaneDataset> with_fitted_planes(std::span<const PlaneDataset> datasets, const Extrinsics& e) {
  std::vector<PlaneDataset> out(datasets.begin(), datasets.end());
  for (auto& d : out) {
    if (d.plane) continue;
    std::vector<Vec3> pts;
    pts.reserve(d.samples.size());
    for (const auto& s : d.samples) pts.push_back(sample_to_world(s, e));
    Plane p = fit_plane_least_squares(pts);
    Vec3 centroid = Vec3::Zero();
    for (const auto& q : pts) centroid += q;
    centroid /= static_cast<double>(pts.size());
    if (p.normal.dot(-centroid) < 0.0) {
      p.normal = -p.normal;
      p.offset = -p.offset;
    }
    d.plane = p;
  }
  return out;
}

namespace {

std::vector<double> standard_errors(const Eigen::MatrixXd& jac, const Eigen::VectorXd& r) {
  const auto m = jac.rows(), p = jac.cols();
  std::vector<double> out(static_cast<std::size_t>(p), 0.0);
  if (m <= p) return out;
  const double sigma2 = r.squaredNorm() / static_cast<double>(m - p);
  const Eigen::MatrixXd cov = (jac.transpose() * jac).ldlt().solve(Eigen::MatrixXd::Identity(p, p)) * sigma2;
  for (Eigen::Index j = 0; j < p; ++j) out[static_cast<std::size_t>(j)] = std::sqrt(std::max(cov(j, j), 0.0));
  return out;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& jac, const std::vector<int>& cols) {
  Eigen::MatrixXd out(jac.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = jac.col(cols[j]);
  return out;
}

void check_rank(const Eigen::MatrixXd& jac, const std::vector<int>& active, const std::vector<std::string>& names,
                double tol, const char* stage) {
  std::vector<std::string> active_names;
  for (int c : active) active_names.push_back(names[static_cast<std::size_t>(c)]);
  const auto bad = unconstrained_parameters(select_columns(jac, active), active_names, tol);
  if (!bad.empty()) {
    throw DegeneracyError(std::string(stage) + " Jacobian is rank deficient; unconstrained: " + join(bad), bad);
  }
}

}  // namespace

CalibrationResult calibrate(std::span<const PlaneDataset> datasets, const Extrinsics& init,
                            const CalibrationOptions& options) {
  for (const auto& d : datasets) d.validate();

  const auto planes = with_fitted_planes(datasets, init);
  // Normals along the rotation axis are invariant under the platform turn.
  const double axis_cos = std::cos(options.min_axis_angle);
  if (!planes.empty() && std::all_of(planes.begin(), planes.end(), [&](const PlaneDataset& d) {
        return std::abs(d.plane->normal.y()) > axis_cos;
      })) {
    throw DegeneracyError("every plane normal lies along the rotation axis", {"roll", "yaw", "t_x", "t_z"});
  }
  CalibrationResult result;
  result.extrinsics = init;
  if (!options.estimate_pitch) result.unidentifiable.push_back("pitch");
  if (!options.estimate_translation_y) result.unidentifiable.push_back("t_y");

  // Rotation stage.
  RotationalCostFunction rot(planes);
  const auto rot_names = rot.parameter_names();
  std::vector<int> rot_active{0};
  if (options.estimate_pitch) rot_active.push_back(1);
  rot_active.push_back(2);
  for (std::size_t k = 3; k < rot.num_parameters(); ++k) rot_active.push_back(static_cast<int>(k));

  const Eigen::VectorXd x0 = rot.initial_parameters(init.rotation);
  check_rank(rot.jacobian(x0), rot_active, rot_names, options.rank_tolerance, "rotational");
  if (planes.size() < options.min_planes) {
    throw DegeneracyError(std::to_string(planes.size()) + " plane datasets given; at least " +
                              std::to_string(options.min_planes) + " are required",
                          {"roll", "yaw", "t_x", "t_z"});
  }

  const LeastSquaresProblem rot_problem{[&](const Eigen::VectorXd& x) { return rot.residuals(x); },
                                        [&](const Eigen::VectorXd& x) { return rot.jacobian(x); }};
  const auto rot_sol = levenberg_marquardt(rot_problem, x0, rot_active, options.solver);
  const Eigen::VectorXd rot_r = rot.residuals(rot_sol.x);
  if (!rot_sol.converged) {
    std::ostringstream msg;
    msg << "rotational stage did not converge after " << rot_sol.iterations
        << " iterations; residual norm " << rot_r.norm();
    throw Error(ErrorCode::kNotConverged, msg.str());
  }
  check_rank(rot.jacobian(rot_sol.x), rot_active, rot_names, options.rank_tolerance, "rotational");

  result.extrinsics.rotation = RotationalCostFunction::angles(rot_sol.x);
  result.rotational_residual_norm = rot_r.norm();
  result.rotational_iterations = rot_sol.iterations;
  {
    const auto se = standard_errors(select_columns(rot.jacobian(rot_sol.x), rot_active), rot_r);
    for (std::size_t j = 0; j < rot_active.size(); ++j) {
      if (rot_active[j] == 0) result.rotation_std_error.roll = se[j];
      if (rot_active[j] == 1) result.rotation_std_error.pitch = se[j];
      if (rot_active[j] == 2) result.rotation_std_error.yaw = se[j];
    }
  }

  // Translation stage. Each pass refits the plane normals on points reconstructed with the current
  // t, then solves the translational cost for t; both steps lower the same point-to-plane sum.
  std::vector<PlaneDataset> refined;
  std::vector<int> trans_active{0};
  if (options.estimate_translation_y) trans_active.push_back(1);
  trans_active.push_back(2);
  Eigen::VectorXd t = init.translation;
  Eigen::VectorXd trans_r;
  std::unique_ptr<TranslationalCostFunction> trans;
  bool settled = false;
  for (int pass = 0; pass < options.max_translation_passes && !settled; ++pass) {
    refined.assign(datasets.begin(), datasets.end());
    for (auto& d : refined) d.plane.reset();
    refined = with_fitted_planes(refined, {result.extrinsics.rotation, t});
    trans = std::make_unique<TranslationalCostFunction>(refined, result.extrinsics.rotation);
    if (pass == 0) {
      check_rank(trans->jacobian(t), trans_active, TranslationalCostFunction::parameter_names(),
                 options.rank_tolerance, "translational");
    }
    const LeastSquaresProblem trans_problem{[&](const Eigen::VectorXd& x) { return trans->residuals(x); },
                                            [&](const Eigen::VectorXd& x) { return trans->jacobian(x); }};
    const auto sol = levenberg_marquardt(trans_problem, t, trans_active, options.solver);
    trans_r = trans->residuals(sol.x);
    if (!sol.converged) {
      std::ostringstream msg;
      msg << "translational stage did not converge after " << sol.iterations << " iterations; residual norm "
          << trans_r.norm();
      throw Error(ErrorCode::kNotConverged, msg.str());
    }
    result.translational_iterations += sol.iterations;
    settled = (sol.x - t).norm() < options.translation_pass_tolerance;
    t = sol.x;
  }
  if (!settled) {
    std::ostringstream msg;
    msg << "translation passes did not settle after " << options.max_translation_passes
        << " passes; residual norm " << trans_r.norm();
    throw Error(ErrorCode::kNotConverged, msg.str());
  }
  result.extrinsics.translation = t;
  result.translational_residual_norm = trans_r.norm();
  {
    const auto se = standard_errors(select_columns(trans->jacobian(t), trans_active), trans_r);
    for (std::size_t j = 0; j < trans_active.size(); ++j) {
      result.translation_std_error[trans_active[j]] = se[j];
    }
  }

  // Report planes in the calibrated platform frame.
  for (std::size_t j = 0; j < refined.size(); ++j) {
    const Vec3 n = refined[j].plane->normal;
    double mu = 0.0;
    for (const auto& s : refined[j].samples) mu += n.dot(sample_to_world(s, result.extrinsics));
    mu /= static_cast<double>(refined[j].samples.size());
    result.planes.push_back({n, mu});
  }
  return result;
}

}  // namespace truckloc
