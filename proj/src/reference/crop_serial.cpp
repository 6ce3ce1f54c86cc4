#include "truckloc/world_frame.hpp"

namespace truckloc::reference {

PointCloud crop_to_parking_serial(const PointCloud& cloud, const RigidTransform& a_from_o, const ParkingArea& area,
                                  const CropBounds& bounds) {
  bounds.validate();
  PointCloud out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 a = a_from_o * cloud.points[i];
    if (a.x() < 0.0 || a.x() > area.x_max) continue;
    if (a.y() < 0.0 || a.y() > area.y_max) continue;
    if (a.z() < bounds.z_min || a.z() > bounds.z_max) continue;
    out.push_back(a, cloud.intensity[i]);
  }
  return out;
}

}  // namespace truckloc::reference
