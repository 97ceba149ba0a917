#pragma once

#include <filesystem>

#include "splatstyle/core.hpp"

namespace splatstyle {

/// Optimizable 3D Gaussian cloud. Scales live in log-space and opacity in
/// logit-space so unconstrained gradient steps keep them valid; colors are
/// degree-0 RGB in [0, 1].
struct GaussianCloud {
  PointsX3 means;           // world-space positions
  PointsX4 rotations;       // unit quaternions (w, x, y, z)
  PointsX3 log_scales;      // axis scales are exp(log_scales)
  VecX opacity_logits;      // opacity = sigmoid(logit)
  PointsX3 colors;          // RGB in [0, 1]

  Eigen::Index size() const { return means.rows(); }

  static GaussianCloud zeros(Eigen::Index n);

  /// Renormalizes every quaternion in place. Idempotent.
  void normalize_rotations();

  /// Clamps colors to [0, 1] in place.
  void clamp_colors();

  bool all_finite() const;

  bool operator==(const GaussianCloud& o) const;
};

/// Gradient of a scalar loss with respect to every cloud parameter; shapes
/// mirror GaussianCloud.
struct CloudGrads {
  PointsX3 means;
  PointsX4 rotations;
  PointsX3 log_scales;
  VecX opacity_logits;
  PointsX3 colors;

  static CloudGrads zeros(Eigen::Index n);

  CloudGrads& operator+=(const CloudGrads& o);
  bool all_finite() const;
  /// Name of the first parameter group containing a non-finite entry, or "".
  std::string first_non_finite_group() const;
};

/// World-space covariance R * diag(exp(2 s)) * R^T from one Gaussian's
/// parameters. The quaternion is normalized internally, so callers may pass
/// mildly denormalized values.
Mat3 covariance_from_params(const Vec3& log_scale, const Vec4& quat);

/// Rotation matrix of a quaternion (w, x, y, z); normalizes internally.
Mat3 quat_to_rotation(const Vec4& quat);

enum class InitShape { Sphere, Box };

InitShape parse_init_shape(const std::string& name);

/// Seeds a cloud on a primitive: means on a sphere of the given radius or
/// inside a centered box of the given side length, isotropic scales set from
/// mean nearest-neighbor spacing, opacity 0.1, mid-gray color. All fields are
/// quantized to float32 (the on-disk precision) so a save/load round trip is
/// exact.
GaussianCloud init_cloud(InitShape shape, Eigen::Index n, double extent, uint64_t seed);

// Binary little-endian PLY interchange. Field layout (element vertex):
//   x y z opacity scale_0..2 rot_0..3 f_dc_0..2, all float32.
void save_ply(const GaussianCloud& cloud, const std::filesystem::path& path);
GaussianCloud load_ply(const std::filesystem::path& path);

}  // namespace splatstyle
