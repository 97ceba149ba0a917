#include "splatstyle/rasterizer.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <numeric>
#include <thread>

namespace splatstyle {

namespace {

constexpr double kCovDilation = 0.3;      // px^2 anti-aliasing floor
constexpr double kAlphaClamp = 0.999;
constexpr double kAlphaSkip = 1.0 / 255.0;
constexpr double kTransmittanceStop = 1e-4;
constexpr int kRowsPerBlock = 16;         // fixed block grid keeps reductions
                                          // independent of the thread count

struct PixelBounds {
  int x0, x1, y0, y1;  // half-open
  bool empty() const { return x0 >= x1 || y0 >= y1; }
};

PixelBounds bbox_of(const ProjectedGaussian& pg, int width, int height) {
  PixelBounds b;
  b.x0 = std::max(0, static_cast<int>(std::floor(pg.mean2d.x() - pg.radius)));
  b.x1 = std::min(width, static_cast<int>(std::ceil(pg.mean2d.x() + pg.radius)) + 1);
  b.y0 = std::max(0, static_cast<int>(std::floor(pg.mean2d.y() - pg.radius)));
  b.y1 = std::min(height, static_cast<int>(std::ceil(pg.mean2d.y() + pg.radius)) + 1);
  return b;
}

void run_blocks(int n_blocks, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, n_blocks));
  if (threads == 1) {
    for (int b = 0; b < n_blocks; ++b) body(b);
    return;
  }
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int b = next.fetch_add(1); b < n_blocks; b = next.fetch_add(1)) body(b);
  };
  std::vector<std::thread> pool;
  pool.reserve(threads - 1);
  for (int i = 0; i + 1 < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

// Per-block gradient accumulators in screen-space quantities; chained to the
// 3D parameters once, after all blocks are merged.
struct ScreenGrads {
  PointsX3 color;       // N x 3
  VecX opacity;         // d<g,rgb>/d(raw opacity)
  Eigen::Matrix<double, Eigen::Dynamic, 2> mean2d;
  PointsX3 conic;       // (C00, C01, C11) full-matrix convention
  explicit ScreenGrads(Eigen::Index n)
      : color(PointsX3::Zero(n, 3)),
        opacity(VecX::Zero(n)),
        mean2d(Eigen::Matrix<double, Eigen::Dynamic, 2>::Zero(n, 2)),
        conic(PointsX3::Zero(n, 3)) {}
  void merge(const ScreenGrads& o) {
    color += o.color;
    opacity += o.opacity;
    mean2d += o.mean2d;
    conic += o.conic;
  }
};

}  // namespace

ProjectedGaussian project_gaussian(const PinholeCamera& cam, const Vec3& mean,
                                   const Mat3& cov3d) {
  Mat3 r_cw;
  Vec3 t_cw;
  cam.world_to_camera(r_cw, t_cw);
  const Vec3 p = r_cw * mean + t_cw;

  ProjectedGaussian pg;
  if (!(p.z() >= cam.near) || !(p.z() <= cam.far)) return pg;  // culled
  pg.culled = false;
  pg.depth = p.z();

  const double f = cam.focal();
  const Vec2 pp = cam.principal_point();
  pg.mean2d = {f * p.x() / p.z() + pp.x(), f * p.y() / p.z() + pp.y()};

  Eigen::Matrix<double, 2, 3> jac;
  jac << f / p.z(), 0, -f * p.x() / (p.z() * p.z()),
         0, f / p.z(), -f * p.y() / (p.z() * p.z());
  const Eigen::Matrix<double, 2, 3> t2 = jac * r_cw;
  pg.cov2d = t2 * cov3d * t2.transpose();
  pg.cov2d(0, 0) += kCovDilation;
  pg.cov2d(1, 1) += kCovDilation;

  const double det = pg.cov2d.determinant();
  if (!(det > 0) || !pg.cov2d.allFinite()) {
    pg.culled = true;
    pg.radius = 0;
    return pg;
  }
  pg.conic << pg.cov2d(1, 1) / det, -pg.cov2d(0, 1) / det,
              -pg.cov2d(1, 0) / det, pg.cov2d(0, 0) / det;

  const double mid = 0.5 * (pg.cov2d(0, 0) + pg.cov2d(1, 1));
  const double disc = std::sqrt(std::max(0.0, mid * mid - det));
  pg.radius = 3.0 * std::sqrt(mid + disc);
  return pg;
}

RenderOutput render(const GaussianCloud& cloud, const PinholeCamera& cam,
                    const Vec3& background, const RenderOptions& opts) {
  if (!cloud.all_finite()) throw ParameterError("render: non-finite cloud parameters");
  const Eigen::Index n = cloud.size();
  const int w = cam.width, h = cam.height;

  RenderOutput out;
  out.rgb = Image::zeros(h, w);
  out.alpha = ArrXX::Zero(h, w);
  out.screen_radii = VecX::Zero(n);
  out.replay.background = background;
  out.replay.projected.resize(n);

  for (Eigen::Index i = 0; i < n; ++i) {
    const Mat3 cov3d = covariance_from_params(cloud.log_scales.row(i).transpose(),
                                              cloud.rotations.row(i).transpose());
    out.replay.projected[i] = project_gaussian(cam, cloud.means.row(i).transpose(), cov3d);
    out.screen_radii[i] = out.replay.projected[i].culled ? 0.0 : out.replay.projected[i].radius;
  }

  out.sort_order.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i)
    if (!out.replay.projected[i].culled) out.sort_order.push_back(static_cast<int>(i));
  std::stable_sort(out.sort_order.begin(), out.sort_order.end(), [&](int a, int b) {
    return out.replay.projected[a].depth < out.replay.projected[b].depth;
  });

  // CSR pixel lists, filled in depth order so each per-pixel run is already
  // front-to-back.
  const int n_pix = h * w;
  out.replay.offsets.assign(n_pix + 1, 0);
  for (int gi : out.sort_order) {
    const auto b = bbox_of(out.replay.projected[gi], w, h);
    if (b.empty()) continue;
    for (int y = b.y0; y < b.y1; ++y)
      for (int x = b.x0; x < b.x1; ++x) out.replay.offsets[y * w + x + 1]++;
  }
  std::partial_sum(out.replay.offsets.begin(), out.replay.offsets.end(),
                   out.replay.offsets.begin());
  out.replay.entries.resize(out.replay.offsets.back());
  {
    std::vector<int> cursor(out.replay.offsets.begin(), out.replay.offsets.end() - 1);
    for (int gi : out.sort_order) {
      const auto b = bbox_of(out.replay.projected[gi], w, h);
      if (b.empty()) continue;
      for (int y = b.y0; y < b.y1; ++y)
        for (int x = b.x0; x < b.x1; ++x) out.replay.entries[cursor[y * w + x]++] = gi;
    }
  }

  const int n_blocks = (h + kRowsPerBlock - 1) / kRowsPerBlock;
  run_blocks(n_blocks, opts.threads, [&](int block) {
    const int y0 = block * kRowsPerBlock;
    const int y1 = std::min(h, y0 + kRowsPerBlock);
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < w; ++x) {
        const int pix = y * w + x;
        double trans = 1.0;
        Vec3 acc = Vec3::Zero();
        for (int k = out.replay.offsets[pix]; k < out.replay.offsets[pix + 1]; ++k) {
          const int gi = out.replay.entries[k];
          const ProjectedGaussian& pg = out.replay.projected[gi];
          const Vec2 d(x + 0.5 - pg.mean2d.x(), y + 0.5 - pg.mean2d.y());
          const double power = -0.5 * d.dot(pg.conic * d);
          if (power > 0) continue;
          const double gval = std::exp(power);
          const double opacity = sigmoid(cloud.opacity_logits[gi]);
          const double alpha = std::min(kAlphaClamp, opacity * gval);
          if (alpha < kAlphaSkip) continue;
          const double weight = alpha * trans;
          acc += weight * cloud.colors.row(gi).transpose();
          trans *= 1.0 - alpha;
          if (trans < kTransmittanceStop) break;
        }
        acc += trans * background;
        out.rgb.ch[0](y, x) = acc[0];
        out.rgb.ch[1](y, x) = acc[1];
        out.rgb.ch[2](y, x) = acc[2];
        out.alpha(y, x) = 1.0 - trans;
      }
    }
  });

  return out;
}

namespace {

struct ReplayEntry {
  int gi;
  double alpha;
  double gval;
  double opacity;
  double trans_before;
  Vec2 d;
};

// d<g,rgb>/dR for the unit-quaternion rotation, then through the
// normalization Jacobian back to the raw quaternion.
Vec4 quat_grad_from_rotation_grad(const Vec4& quat, const Mat3& gr) {
  const double nq = quat.norm();
  const Vec4 qh = quat / nq;
  const double qw = qh[0], qx = qh[1], qy = qh[2], qz = qh[3];
  Vec4 g_hat;
  g_hat[0] = 2 * (-qz * gr(0, 1) + qy * gr(0, 2) + qz * gr(1, 0) - qx * gr(1, 2) -
                  qy * gr(2, 0) + qx * gr(2, 1));
  g_hat[1] = 2 * (qy * gr(0, 1) + qz * gr(0, 2) + qy * gr(1, 0) - 2 * qx * gr(1, 1) -
                  qw * gr(1, 2) + qz * gr(2, 0) + qw * gr(2, 1) - 2 * qx * gr(2, 2));
  g_hat[2] = 2 * (-2 * qy * gr(0, 0) + qx * gr(0, 1) + qw * gr(0, 2) + qx * gr(1, 0) +
                  qz * gr(1, 2) - qw * gr(2, 0) + qz * gr(2, 1) - 2 * qy * gr(2, 2));
  g_hat[3] = 2 * (-2 * qz * gr(0, 0) - qw * gr(0, 1) + qx * gr(0, 2) + qw * gr(1, 0) -
                  2 * qz * gr(1, 1) + qy * gr(1, 2) + qx * gr(2, 0) + qy * gr(2, 1));
  return (g_hat - qh * qh.dot(g_hat)) / nq;
}

}  // namespace

CloudGrads render_backward(const GaussianCloud& cloud, const PinholeCamera& cam,
                           const RenderOutput& out, const Image& grad_rgb,
                           const RenderOptions& opts) {
  const Eigen::Index n = cloud.size();
  const int w = cam.width, h = cam.height;
  if (grad_rgb.height != h || grad_rgb.width != w)
    throw ParameterError("render_backward: grad_rgb shape mismatch");
  if (static_cast<Eigen::Index>(out.replay.projected.size()) != n ||
      static_cast<int>(out.replay.offsets.size()) != h * w + 1)
    throw ParameterError("render_backward: render output does not match cloud/camera");

  const Vec3 bg = out.replay.background;
  const int n_blocks = (h + kRowsPerBlock - 1) / kRowsPerBlock;
  std::vector<ScreenGrads> block_grads(n_blocks, ScreenGrads(n));

  run_blocks(n_blocks, opts.threads, [&](int block) {
    ScreenGrads& sg = block_grads[block];
    std::vector<ReplayEntry> stack;
    stack.reserve(64);
    const int y0 = block * kRowsPerBlock;
    const int y1 = std::min(h, y0 + kRowsPerBlock);
    for (int y = y0; y < y1; ++y) {
      for (int x = 0; x < w; ++x) {
        const int pix = y * w + x;
        if (out.replay.offsets[pix] == out.replay.offsets[pix + 1]) continue;
        const Vec3 g(grad_rgb.ch[0](y, x), grad_rgb.ch[1](y, x), grad_rgb.ch[2](y, x));

        // forward replay, identical arithmetic to render()
        stack.clear();
        double trans = 1.0;
        for (int k = out.replay.offsets[pix]; k < out.replay.offsets[pix + 1]; ++k) {
          const int gi = out.replay.entries[k];
          const ProjectedGaussian& pg = out.replay.projected[gi];
          const Vec2 d(x + 0.5 - pg.mean2d.x(), y + 0.5 - pg.mean2d.y());
          const double power = -0.5 * d.dot(pg.conic * d);
          if (power > 0) continue;
          const double gval = std::exp(power);
          const double opacity = sigmoid(cloud.opacity_logits[gi]);
          const double alpha = std::min(kAlphaClamp, opacity * gval);
          if (alpha < kAlphaSkip) continue;
          stack.push_back({gi, alpha, gval, opacity, trans, d});
          trans *= 1.0 - alpha;
          if (trans < kTransmittanceStop) break;
        }

        // suffix pass: S holds sum_{j>i} c_j w_j + T_final * bg
        Vec3 suffix = trans * bg;
        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
          const ReplayEntry& e = *it;
          const Vec3 color = cloud.colors.row(e.gi).transpose();
          const double weight = e.alpha * e.trans_before;

          sg.color.row(e.gi) += (weight * g).transpose();

          const double d_alpha =
              g.dot(color * e.trans_before - suffix / (1.0 - e.alpha));
          if (e.opacity * e.gval < kAlphaClamp) {
            sg.opacity[e.gi] += d_alpha * e.gval;
            const double d_power = d_alpha * e.opacity * e.gval;
            const ProjectedGaussian& pg = out.replay.projected[e.gi];
            const Vec2 cd = pg.conic * e.d;
            sg.mean2d.row(e.gi) += (d_power * cd).transpose();
            sg.conic(e.gi, 0) += -0.5 * d_power * e.d.x() * e.d.x();
            sg.conic(e.gi, 1) += -0.5 * d_power * e.d.x() * e.d.y();
            sg.conic(e.gi, 2) += -0.5 * d_power * e.d.y() * e.d.y();
          }
          suffix += weight * color;
        }
      }
    }
  });

  ScreenGrads total(n);
  for (const auto& bgr : block_grads) total.merge(bgr);

  // Chain screen-space gradients to the 3D parameters, once per Gaussian.
  CloudGrads grads = CloudGrads::zeros(n);
  Mat3 r_cw;
  Vec3 t_cw;
  cam.world_to_camera(r_cw, t_cw);
  const double f = cam.focal();

  for (Eigen::Index i = 0; i < n; ++i) {
    const ProjectedGaussian& pg = out.replay.projected[i];
    if (pg.culled) continue;

    grads.colors.row(i) = total.color.row(i);
    const double o = sigmoid(cloud.opacity_logits[i]);
    grads.opacity_logits[i] = total.opacity[i] * o * (1.0 - o);

    Mat2 g_conic;
    g_conic << total.conic(i, 0), total.conic(i, 1), total.conic(i, 1), total.conic(i, 2);
    const Mat2 g_cov2d = -pg.conic * g_conic * pg.conic;

    const Vec4 quat = cloud.rotations.row(i).transpose();
    const Mat3 rot = quat_to_rotation(quat);
    const Vec3 scales = cloud.log_scales.row(i).transpose().array().exp();
    const Mat3 m3 = rot * scales.asDiagonal();
    const Mat3 cov3d = m3 * m3.transpose();

    const Vec3 p = r_cw * cloud.means.row(i).transpose() + t_cw;
    const double z = p.z(), z2 = z * z, z3 = z2 * z;
    Eigen::Matrix<double, 2, 3> jac;
    jac << f / z, 0, -f * p.x() / z2, 0, f / z, -f * p.y() / z2;
    const Eigen::Matrix<double, 2, 3> t2 = jac * r_cw;

    const Mat3 g_cov3d = t2.transpose() * g_cov2d * t2;
    const Eigen::Matrix<double, 2, 3> g_t2 = 2.0 * g_cov2d * t2 * cov3d;
    const Eigen::Matrix<double, 2, 3> g_jac = g_t2 * r_cw.transpose();

    Vec3 gp = Vec3::Zero();
    const Vec2 g_mean2d = total.mean2d.row(i).transpose();
    gp.x() += g_mean2d.x() * f / z;
    gp.y() += g_mean2d.y() * f / z;
    gp.z() += -(g_mean2d.x() * f * p.x() + g_mean2d.y() * f * p.y()) / z2;
    gp.x() += g_jac(0, 2) * (-f / z2);
    gp.y() += g_jac(1, 2) * (-f / z2);
    gp.z() += g_jac(0, 0) * (-f / z2) + g_jac(1, 1) * (-f / z2) +
              g_jac(0, 2) * (2 * f * p.x() / z3) + g_jac(1, 2) * (2 * f * p.y() / z3);
    grads.means.row(i) = (r_cw.transpose() * gp).transpose();

    const Mat3 g_m3 = 2.0 * g_cov3d * m3;
    const Mat3 g_rot = g_m3 * scales.asDiagonal();
    const Vec3 g_scale_diag = (rot.transpose() * g_m3).diagonal();
    grads.log_scales.row(i) = (scales.array() * g_scale_diag.array()).transpose();
    grads.rotations.row(i) = quat_grad_from_rotation_grad(quat, g_rot).transpose();
  }

  return grads;
}

std::optional<RadiusStats> radius_stats(const RenderOutput& out) {
  std::vector<double> radii;
  radii.reserve(out.screen_radii.size());
  for (Eigen::Index i = 0; i < out.screen_radii.size(); ++i)
    if (out.screen_radii[i] > 0) radii.push_back(out.screen_radii[i]);
  if (radii.empty()) return std::nullopt;
  std::sort(radii.begin(), radii.end());
  auto rank = [&](double q) {
    const size_t idx = static_cast<size_t>(std::ceil(q * radii.size()));
    return radii[std::min(radii.size(), std::max<size_t>(idx, 1)) - 1];
  };
  RadiusStats s;
  s.count = static_cast<Eigen::Index>(radii.size());
  s.mean = std::accumulate(radii.begin(), radii.end(), 0.0) / radii.size();
  s.p50 = rank(0.5);
  s.p95 = rank(0.95);
  return s;
}

int default_render_threads() {
  if (const char* env = std::getenv("SPLATSTYLE_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  return 1;
}

}  // namespace splatstyle
