#include "splatstyle/regularizer.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>
#include <vector>

namespace splatstyle {

double ellipsoid_surface_area(double a, double b, double c) {
  if (!(a > 0) || !(b > 0) || !(c > 0))
    throw ParameterError("ellipsoid_surface_area: axes must be positive");
  const double p = kThomsenP;
  const double ap = std::pow(a, p), bp = std::pow(b, p), cp = std::pow(c, p);
  return 4.0 * std::numbers::pi * std::pow((ap * bp + ap * cp + bp * cp) / 3.0, 1.0 / p);
}

namespace {

VecX areas_of(const GaussianCloud& cloud) {
  const Eigen::Index n = cloud.size();
  VecX areas(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 s = cloud.log_scales.row(i).transpose().array().exp();
    areas[i] = ellipsoid_surface_area(s[0], s[1], s[2]);
  }
  return areas;
}

}  // namespace

SurfaceLossReport surface_loss(const GaussianCloud& cloud, bool mean_of_logs) {
  const Eigen::Index n = cloud.size();
  if (n == 0) throw ParameterError("surface_loss: empty cloud");

  SurfaceLossReport rep;
  rep.per_gaussian_area = areas_of(cloud);
  const VecX logs = rep.per_gaussian_area.array().log();
  rep.log_mean_area =
      mean_of_logs ? logs.mean() : std::log(rep.per_gaussian_area.mean());
  rep.loss = (logs.array() - rep.log_mean_area).square().mean();
  return rep;
}

PointsX3 surface_loss_grad(const GaussianCloud& cloud, bool mean_of_logs) {
  const Eigen::Index n = cloud.size();
  if (n == 0) throw ParameterError("surface_loss_grad: empty cloud");

  const VecX areas = areas_of(cloud);
  const VecX logs = areas.array().log();
  const double ref = mean_of_logs ? logs.mean() : std::log(areas.mean());

  // dL/dlog A_i: direct term plus, for the arithmetic mean, the chain through
  // log Abar (dAbar/dA_i = 1/N, dA_i/dlog A_i = A_i).
  VecX d_logs = 2.0 / n * (logs.array() - ref);
  if (mean_of_logs) {
    // the -mean(logs) chain sums to zero; nothing else to add
  } else {
    const double mean_area = areas.mean();
    const double m = d_logs.sum();  // = 2 * (mean(logs) - ref)
    d_logs.array() -= m * areas.array() / (n * mean_area);
  }

  PointsX3 grad = PointsX3::Zero(n, 3);
  const double p = kThomsenP;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 s = cloud.log_scales.row(i).transpose().array().exp();
    const double ap = std::pow(s[0], p), bp = std::pow(s[1], p), cp = std::pow(s[2], p);
    const double u = ap * bp + ap * cp + bp * cp;
    // dlog A / dlog s = (a^p (b^p + c^p), b^p (a^p + c^p), c^p (a^p + b^p)) / u
    grad(i, 0) = d_logs[i] * ap * (bp + cp) / u;
    grad(i, 1) = d_logs[i] * bp * (ap + cp) / u;
    grad(i, 2) = d_logs[i] * cp * (ap + bp) / u;
  }
  return grad;
}

double log_area_variance(const GaussianCloud& cloud) {
  const VecX logs = areas_of(cloud).array().log();
  return (logs.array() - logs.mean()).square().mean();
}

std::string surface_report_csv_row(int step, const SurfaceLossReport& report) {
  VecX sorted = report.per_gaussian_area;
  std::sort(sorted.data(), sorted.data() + sorted.size());
  const Eigen::Index idx =
      std::min<Eigen::Index>(sorted.size() - 1,
                             static_cast<Eigen::Index>(std::ceil(0.95 * sorted.size())) - 1);
  std::ostringstream os;
  os.precision(12);
  os << step << "," << report.loss << "," << report.log_mean_area << ","
     << sorted[std::max<Eigen::Index>(idx, 0)];
  return os.str();
}

}  // namespace splatstyle
