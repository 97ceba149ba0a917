#pragma once

#include "splatstyle/gaussian_cloud.hpp"

namespace splatstyle {

/// Thomsen exponent for the closed-form ellipsoid surface area (relative
/// error below ~1.1% for moderate axis ratios).
inline constexpr double kThomsenP = 1.6075;

/// A ~= 4*pi*((a^p b^p + a^p c^p + b^p c^p)/3)^(1/p). Exact for spheres.
double ellipsoid_surface_area(double a, double b, double c);

struct SurfaceLossReport {
  double loss = 0;
  VecX per_gaussian_area;  // strictly positive
  double log_mean_area = 0;
};

/// Spread of log surface areas: (1/N) sum_i (log A_i - log Abar)^2 with Abar
/// the arithmetic mean area by default; mean_of_logs switches the reference
/// to the mean of log A_i (a plain variance). Both are invariant under a
/// global rescale of the cloud.
SurfaceLossReport surface_loss(const GaussianCloud& cloud, bool mean_of_logs = false);

/// Exact gradient of surface_loss with respect to log_scales (N x 3); every
/// other parameter group has zero gradient.
PointsX3 surface_loss_grad(const GaussianCloud& cloud, bool mean_of_logs = false);

/// Variance of log A_i (reporting aid; the mean-of-logs flavor of the loss).
double log_area_variance(const GaussianCloud& cloud);

/// CSV line "step,loss,log_mean_area,p95_area" for telemetry streams.
std::string surface_report_csv_row(int step, const SurfaceLossReport& report);

}  // namespace splatstyle
