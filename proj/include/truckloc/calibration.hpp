#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "truckloc/geometry.hpp"
#include "truckloc/least_squares.hpp"
#include "truckloc/scan_model.hpp"

namespace truckloc {

/// Samples belonging to one physical target plane.
struct PlaneDataset {
  int id = 0;
  std::vector<ScanSample> samples;
  std::optional<Plane> plane;  // platform frame

  /// Throws unless >= 20 samples over >= 2 distinct platform angles.
  void validate() const;
};

/// Direction of one scan line across a plane, in the LiDAR frame. Independent of
/// the extrinsics since all samples of a line share phi.
struct ScanLineDirection {
  double platform_angle = 0.0;
  Vec3 direction = Vec3::UnitX();
  std::size_t support = 0;
  double spread = 0.0;  // sqrt of the scatter eigenvalue along the line, meters
};

std::vector<ScanLineDirection> scan_line_directions(const PlaneDataset& dataset, std::size_t min_support = 5);

/// Rotation stage. Each residual is weighted by its line's spread, the inverse of
/// the angular standard error of the fitted direction. Parameters: [roll, pitch, yaw, a_0, b_0, a_1, b_1, ...] where the
/// plane normal j is normalize(n0_j + a_j e1_j + b_j e2_j).
class RotationalCostFunction {
 public:
  explicit RotationalCostFunction(std::span<const PlaneDataset> datasets);

  std::size_t num_parameters() const { return 3 + 2 * planes_.size(); }
  std::size_t num_residuals() const { return lines_.size(); }
  std::size_t num_planes() const { return planes_.size(); }

  Eigen::VectorXd initial_parameters(const EulerAngles& w) const;
  Eigen::VectorXd residuals(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
  std::vector<std::string> parameter_names() const;

  static EulerAngles angles(const Eigen::VectorXd& x) { return {x[0], x[1], x[2]}; }
  Vec3 normal(const Eigen::VectorXd& x, std::size_t plane) const;

 private:
  struct PlaneBasis {
    int id;
    Vec3 n0, e1, e2;
  };
  struct Line {
    std::size_t plane;
    Mat3 q;  // platform rotation
    Vec3 d;  // LiDAR-frame direction
    double weight;
  };
  std::vector<PlaneBasis> planes_;
  std::vector<Line> lines_;
};

/// Translation stage. Parameters: [t_x, t_y, t_z]. Residuals are linear in t.
class TranslationalCostFunction {
 public:
  TranslationalCostFunction(std::span<const PlaneDataset> datasets, const EulerAngles& w);

  std::size_t num_residuals() const { return rows_.size(); }
  Eigen::VectorXd residuals(const Eigen::VectorXd& t) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& t) const;
  static std::vector<std::string> parameter_names() { return {"t_x", "t_y", "t_z"}; }

 private:
  struct Row {
    Vec3 a;    // Q^T n
    double c;  // (R_w q) . Q^T n
  };
  std::vector<Row> rows_;
  std::vector<std::pair<std::size_t, std::size_t>> ranges_;  // per plane
};

/// Residual i = spread_i (Q(phi_i) R_w d_i) . n for each scan line; needs fitted planes.
Eigen::VectorXd rotational_cost(const EulerAngles& w, std::span<const PlaneDataset> datasets);

/// Residual i = p_i . n - mu, mu the mean over the plane; needs fitted planes.
Eigen::VectorXd translational_cost(const Vec3& t, std::span<const PlaneDataset> datasets, const EulerAngles& w);

struct CalibrationOptions {
  bool estimate_pitch = false;        // w_y, weakly observable under single-axis rotation
  bool estimate_translation_y = false;  // t_y, same
  std::size_t min_planes = 6;
  double rank_tolerance = 1e-8;
  double min_axis_angle = deg2rad(5.0);  // all normals closer than this to the axis is degenerate
  int max_translation_passes = 100;
  double translation_pass_tolerance = 1e-9;  // meters
  LevenbergMarquardtOptions solver;
};

struct CalibrationResult {
  Extrinsics extrinsics;
  EulerAngles rotation_std_error;  // radians
  Vec3 translation_std_error = Vec3::Zero();
  double rotational_residual_norm = 0.0;
  double translational_residual_norm = 0.0;
  int rotational_iterations = 0;
  int translational_iterations = 0;
  std::vector<std::string> unidentifiable;  // held at the initial value
  std::vector<Plane> planes;                // refined target planes
};

/// Two-stage Levenberg-Marquardt: (roll, yaw) + plane normals, then (t_x, t_z).
/// Throws DegeneracyError when the Jacobian does not constrain every free parameter
/// and Error(kNotConverged) when the solver runs out of iterations.
CalibrationResult calibrate(std::span<const PlaneDataset> datasets, const Extrinsics& init,
                            const CalibrationOptions& options = {});

/// Fills missing `plane` fields from points reconstructed with `e`.
std::vector<PlaneDataset> with_fitted_planes(std::span<const PlaneDataset> datasets, const Extrinsics& e);

}  // namespace truckloc
