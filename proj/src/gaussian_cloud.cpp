#include "splatstyle/gaussian_cloud.hpp"

#include <algorithm>
#include <limits>

namespace splatstyle {

GaussianCloud GaussianCloud::zeros(Eigen::Index n) {
  GaussianCloud c;
  c.means = PointsX3::Zero(n, 3);
  c.rotations = PointsX4::Zero(n, 4);
  c.rotations.col(0).setOnes();
  c.log_scales = PointsX3::Zero(n, 3);
  c.opacity_logits = VecX::Zero(n);
  c.colors = PointsX3::Zero(n, 3);
  return c;
}

void GaussianCloud::normalize_rotations() {
  for (Eigen::Index i = 0; i < size(); ++i) {
    const double n = rotations.row(i).norm();
    if (n > 0) rotations.row(i) /= n;
  }
}

void GaussianCloud::clamp_colors() {
  colors = colors.cwiseMax(0.0).cwiseMin(1.0);
}

bool GaussianCloud::all_finite() const {
  return means.allFinite() && rotations.allFinite() && log_scales.allFinite() &&
         opacity_logits.allFinite() && colors.allFinite();
}

bool GaussianCloud::operator==(const GaussianCloud& o) const {
  return means == o.means && rotations == o.rotations && log_scales == o.log_scales &&
         opacity_logits == o.opacity_logits && colors == o.colors;
}

CloudGrads CloudGrads::zeros(Eigen::Index n) {
  CloudGrads g;
  g.means = PointsX3::Zero(n, 3);
  g.rotations = PointsX4::Zero(n, 4);
  g.log_scales = PointsX3::Zero(n, 3);
  g.opacity_logits = VecX::Zero(n);
  g.colors = PointsX3::Zero(n, 3);
  return g;
}

CloudGrads& CloudGrads::operator+=(const CloudGrads& o) {
  means += o.means;
  rotations += o.rotations;
  log_scales += o.log_scales;
  opacity_logits += o.opacity_logits;
  colors += o.colors;
  return *this;
}

bool CloudGrads::all_finite() const {
  return means.allFinite() && rotations.allFinite() && log_scales.allFinite() &&
         opacity_logits.allFinite() && colors.allFinite();
}

std::string CloudGrads::first_non_finite_group() const {
  if (!means.allFinite()) return "means";
  if (!rotations.allFinite()) return "rotations";
  if (!log_scales.allFinite()) return "log_scales";
  if (!opacity_logits.allFinite()) return "opacity_logits";
  if (!colors.allFinite()) return "colors";
  return "";
}

Mat3 quat_to_rotation(const Vec4& quat) {
  const double n = quat.norm();
  if (!(n > 0) || !quat.allFinite()) throw ParameterError("quat_to_rotation: bad quaternion");
  const double w = quat[0] / n, x = quat[1] / n, y = quat[2] / n, z = quat[3] / n;
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Mat3 covariance_from_params(const Vec3& log_scale, const Vec4& quat) {
  if (!log_scale.allFinite() || !quat.allFinite())
    throw ParameterError("covariance_from_params: non-finite input");
  const Mat3 r = quat_to_rotation(quat);
  const Vec3 s2 = (2.0 * log_scale).array().exp();
  return r * s2.asDiagonal() * r.transpose();
}

InitShape parse_init_shape(const std::string& name) {
  if (name == "sphere") return InitShape::Sphere;
  if (name == "box") return InitShape::Box;
  throw ParameterError("unknown init shape: " + name);
}

namespace {

// Mean distance to the nearest neighbor, brute force. Desk-scale clouds only.
double mean_nn_distance(const PointsX3& pts) {
  const Eigen::Index n = pts.rows();
  if (n < 2) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      best = std::min(best, (pts.row(i) - pts.row(j)).squaredNorm());
    }
    acc += std::sqrt(best);
  }
  return acc / static_cast<double>(n);
}

void quantize_to_storage(GaussianCloud& c) {
  auto snap = [](auto& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = to_storage_precision(m(i, j));
  };
  snap(c.means);
  snap(c.rotations);
  snap(c.log_scales);
  snap(c.opacity_logits);
  snap(c.colors);
}

}  // namespace

GaussianCloud init_cloud(InitShape shape, Eigen::Index n, double extent, uint64_t seed) {
  if (n < 1) throw ParameterError("init_cloud: n must be >= 1");
  if (!(extent > 0)) throw ParameterError("init_cloud: extent must be > 0");

  Rng rng(derive_seed(seed, "init_cloud"));
  GaussianCloud c = GaussianCloud::zeros(n);

  for (Eigen::Index i = 0; i < n; ++i) {
    if (shape == InitShape::Sphere) {
      Vec3 v(rng.normal(), rng.normal(), rng.normal());
      while (v.norm() < 1e-12) v = Vec3(rng.normal(), rng.normal(), rng.normal());
      c.means.row(i) = (extent * v.normalized()).transpose();
    } else {
      c.means.row(i) = Vec3(rng.uniform(-0.5, 0.5) * extent, rng.uniform(-0.5, 0.5) * extent,
                            rng.uniform(-0.5, 0.5) * extent)
                           .transpose();
    }
  }

  const double nn = mean_nn_distance(c.means);
  const double s = (n < 2 || nn <= 0) ? std::log(extent / 2.0) : std::log(nn / 2.0);
  c.log_scales.setConstant(s);
  c.opacity_logits.setConstant(logit(0.1));
  c.colors.setConstant(0.5);

  quantize_to_storage(c);
  return c;
}

}  // namespace splatstyle
