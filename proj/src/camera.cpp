#include "splatstyle/camera.hpp"

#include <numbers>
#include <sstream>

namespace splatstyle {

void PinholeCamera::world_to_camera(Mat3& r_cw, Vec3& t_cw) const {
  const Mat3 r = rotation();
  r_cw = r.transpose();
  t_cw = -r_cw * center();
}

bool PinholeCamera::valid() const {
  const Mat3 r = rotation();
  const bool ortho = (r * r.transpose() - Mat3::Identity()).norm() < 1e-6;
  return ortho && near > 0 && near < far && fov_y > 0 && fov_y < std::numbers::pi &&
         width > 0 && height > 0;
}

PinholeCamera look_at_orbit(double azimuth, double elevation, double radius, double fov_y,
                            int width, int height, double near, double far) {
  if (!(radius > 0)) throw ParameterError("look_at_orbit: radius must be > 0");
  const Vec3 center(radius * std::cos(elevation) * std::cos(azimuth),
                    radius * std::cos(elevation) * std::sin(azimuth),
                    radius * std::sin(elevation));
  const Vec3 forward = (-center).normalized();  // +z looks at the origin
  const Vec3 world_up(0, 0, 1);
  Vec3 right = forward.cross(world_up);
  if (right.norm() < 1e-9) right = Vec3(0, 1, 0);  // looking straight up/down
  right.normalize();
  const Vec3 down = forward.cross(right);  // camera +y points down

  PinholeCamera cam;
  cam.c2w.setIdentity();
  cam.c2w.block<3, 1>(0, 0) = right;
  cam.c2w.block<3, 1>(0, 1) = down;
  cam.c2w.block<3, 1>(0, 2) = forward;
  cam.c2w.block<3, 1>(0, 3) = center;
  cam.fov_y = fov_y;
  cam.width = width;
  cam.height = height;
  cam.near = near;
  cam.far = far;
  return cam;
}

std::vector<PinholeCamera> fixed_ring_cameras(int count, double radius, double elevation,
                                              double fov_y, int width, int height) {
  if (count < 1) throw ParameterError("fixed_ring_cameras: count must be >= 1");
  if (!(radius > 0)) throw ParameterError("fixed_ring_cameras: radius must be > 0");
  std::vector<PinholeCamera> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double az = 2.0 * std::numbers::pi * k / count;
    out.push_back(look_at_orbit(az, elevation, radius, fov_y, width, height));
  }
  return out;
}

PinholeCamera random_orbit_camera(Rng& rng, double radius_lo, double radius_hi,
                                  double elevation_lo, double elevation_hi, double fov_y,
                                  int width, int height) {
  if (radius_hi < radius_lo || elevation_hi < elevation_lo)
    throw ParameterError("random_orbit_camera: inverted range");
  if (!(radius_lo > 0)) throw ParameterError("random_orbit_camera: radius must be > 0");
  const double az = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double r = rng.uniform(radius_lo, radius_hi);
  const double el = rng.uniform(elevation_lo, elevation_hi);
  return look_at_orbit(az, el, r, fov_y, width, height);
}

Eigen::Matrix<double, 12, 1> flatten_extrinsics(const PinholeCamera& cam) {
  Eigen::Matrix<double, 12, 1> flat;
  int k = 0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) flat[k++] = cam.c2w(r, c);
  return flat;
}

std::string orbit_to_config(const OrbitSpec& s) {
  std::ostringstream os;
  os.precision(17);
  os << "azimuth = " << s.azimuth << "\n"
     << "elevation = " << s.elevation << "\n"
     << "radius = " << s.radius << "\n"
     << "fov_y = " << s.fov_y << "\n"
     << "width = " << s.width << "\n"
     << "height = " << s.height << "\n";
  return os.str();
}

OrbitSpec orbit_from_config(const std::string& text) {
  OrbitSpec s;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string key, eq;
    double value;
    if (!(ls >> key >> eq >> value) || eq != "=") continue;
    if (key == "azimuth") s.azimuth = value;
    else if (key == "elevation") s.elevation = value;
    else if (key == "radius") s.radius = value;
    else if (key == "fov_y") s.fov_y = value;
    else if (key == "width") s.width = static_cast<int>(value);
    else if (key == "height") s.height = static_cast<int>(value);
    else throw FormatError("orbit_from_config: unknown key " + key);
  }
  return s;
}

}  // namespace splatstyle
