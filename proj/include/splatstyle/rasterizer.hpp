#pragma once

#include <optional>
#include <vector>

#include "splatstyle/camera.hpp"
#include "splatstyle/gaussian_cloud.hpp"
#include "splatstyle/image.hpp"

namespace splatstyle {

/// One Gaussian projected to screen space.
struct ProjectedGaussian {
  bool culled = true;   // behind the near plane or past far
  Vec2 mean2d;          // continuous pixel coordinates
  Mat2 cov2d;           // screen-space covariance, dilation included
  Mat2 conic;           // cov2d^{-1}
  double depth = 0;     // camera-space z
  double radius = 0;    // 3-sigma extent in pixels (0 when culled)
};

/// EWA projection of a single Gaussian: camera-space depth, screen mean, and
/// screen covariance J W cov3d W^T J^T with a 0.3 px^2 diagonal dilation.
ProjectedGaussian project_gaussian(const PinholeCamera& cam, const Vec3& mean, const Mat3& cov3d);

struct RenderOutput {
  Image rgb;                         // background composited, in [0, 1]
  ArrXX alpha;                       // accumulated opacity per pixel
  VecX screen_radii;                 // per-Gaussian 3-sigma radii (0 = culled)
  std::vector<int> sort_order;       // depth-sorted visible Gaussian indices

  // Replay data for the backward pass; produced by render() and tied to the
  // exact (cloud, camera, background) triple it came from.
  struct Replay {
    Vec3 background;
    std::vector<ProjectedGaussian> projected;
    std::vector<int> offsets;        // CSR row starts, pixels*? (height*width+1)
    std::vector<int> entries;        // Gaussian indices per pixel, front-to-back
  };
  Replay replay;
};

struct RenderOptions {
  int threads = 1;  // render worker count; output is identical for any value
};

/// Forward render: front-to-back alpha compositing in strictly increasing
/// depth order. Per-splat contribution alpha_i = opacity_i * exp(-0.5 d^T
/// conic d) clamped to [0, 0.999]; contributions below 1/255 are skipped and
/// accumulation stops once transmittance drops under 1e-4.
RenderOutput render(const GaussianCloud& cloud, const PinholeCamera& cam,
                    const Vec3& background = Vec3::Ones(),
                    const RenderOptions& opts = {});

/// Gradient of <grad_rgb, rgb> with respect to every cloud parameter group,
/// replaying the forward compositing order. grad_rgb must match the render
/// resolution.
CloudGrads render_backward(const GaussianCloud& cloud, const PinholeCamera& cam,
                           const RenderOutput& out, const Image& grad_rgb,
                           const RenderOptions& opts = {});

struct RadiusStats {
  double mean = 0;
  double p50 = 0;
  double p95 = 0;
  Eigen::Index count = 0;
};

/// Summary of nonzero screen radii; nullopt when every Gaussian is culled.
std::optional<RadiusStats> radius_stats(const RenderOutput& out);

/// Default worker count: SPLATSTYLE_THREADS env var, else 1.
int default_render_threads();

}  // namespace splatstyle
