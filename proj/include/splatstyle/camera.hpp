#pragma once

#include <string>
#include <vector>

#include "splatstyle/core.hpp"

namespace splatstyle {

/// Pinhole camera, OpenCV axis convention in camera space (x right, y down,
/// z forward into the scene). c2w maps camera coordinates to world.
struct PinholeCamera {
  Mat4 c2w = Mat4::Identity();
  double fov_y = 0.7;  // radians
  int width = 64;
  int height = 64;
  double near = 0.1;
  double far = 100.0;

  Mat3 rotation() const { return c2w.topLeftCorner<3, 3>(); }
  Vec3 center() const { return c2w.topRightCorner<3, 1>(); }

  /// World-to-camera rigid transform (R^T, -R^T t).
  void world_to_camera(Mat3& r_cw, Vec3& t_cw) const;

  double focal() const { return 0.5 * height / std::tan(0.5 * fov_y); }
  Vec2 principal_point() const { return {0.5 * width, 0.5 * height}; }

  bool valid() const;
};

/// Spherical orbit pose looking at the origin: azimuth about +z from the +x
/// axis, elevation above the xy plane.
PinholeCamera look_at_orbit(double azimuth, double elevation, double radius, double fov_y,
                            int width, int height, double near = 0.1, double far = 100.0);

/// Ring of cameras at azimuths 2*pi*k/count, shared radius and elevation, all
/// looking at the origin.
std::vector<PinholeCamera> fixed_ring_cameras(int count, double radius, double elevation,
                                              double fov_y, int width, int height);

/// One camera sampled uniformly in azimuth, and in the given radius and
/// elevation ranges.
PinholeCamera random_orbit_camera(Rng& rng, double radius_lo, double radius_hi,
                                  double elevation_lo, double elevation_hi, double fov_y,
                                  int width, int height);

/// Row-major first three rows of c2w; the input to the camera projection
/// layer.
Eigen::Matrix<double, 12, 1> flatten_extrinsics(const PinholeCamera& cam);

/// Plain-text round trip of the orbit parameters that generated a camera.
struct OrbitSpec {
  double azimuth = 0, elevation = 0, radius = 2.5, fov_y = 0.7;
  int width = 64, height = 64;
};
std::string orbit_to_config(const OrbitSpec& spec);
OrbitSpec orbit_from_config(const std::string& text);

}  // namespace splatstyle
