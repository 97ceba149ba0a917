#include "splatstyle/schedule.hpp"

namespace splatstyle {

DiffusionSchedule make_schedule(int steps, double beta_min, double beta_max) {
  if (steps < 2) throw ParameterError("make_schedule: need at least 2 steps");
  if (!(beta_min > 0) || !(beta_min < beta_max) || !(beta_max < 1))
    throw ParameterError("make_schedule: need 0 < beta_min < beta_max < 1");

  DiffusionSchedule s;
  s.steps = steps;
  s.betas = VecX::LinSpaced(steps, beta_min, beta_max);
  s.alpha_bars.resize(steps);
  s.sigmas.resize(steps);
  double prod = 1.0;
  for (int t = 0; t < steps; ++t) {
    prod *= 1.0 - s.betas[t];
    s.alpha_bars[t] = prod;
    s.sigmas[t] = std::sqrt(1.0 - prod);
  }
  return s;
}

Image perturb(const Image& x0, int t, const Image& eps, const DiffusionSchedule& schedule) {
  if (t < 0 || t >= schedule.steps) throw ParameterError("perturb: timestep out of range");
  if (!x0.same_shape(eps)) throw ParameterError("perturb: shape mismatch");
  const double root_ab = std::sqrt(schedule.alpha_bars[t]);
  const double sigma = schedule.sigmas[t];
  Image z(x0.height, x0.width);
  for (int c = 0; c < 3; ++c) z.ch[c] = root_ab * x0.ch[c] + sigma * eps.ch[c];
  return z;
}

int sample_timestep(Rng& rng, double t_lo_frac, double t_hi_frac,
                    const DiffusionSchedule& schedule) {
  if (!(t_lo_frac >= 0) || !(t_lo_frac < t_hi_frac) || !(t_hi_frac <= 1))
    throw ParameterError("sample_timestep: need 0 <= lo < hi <= 1");
  const int t_count = schedule.steps;
  int lo = static_cast<int>(std::floor(t_lo_frac * t_count));
  int hi = static_cast<int>(std::floor(t_hi_frac * t_count));
  lo = std::min(lo, t_count - 1);
  hi = std::min(hi, t_count);
  if (hi <= lo) hi = lo + 1;
  return static_cast<int>(rng.uniform_int(lo, hi));
}

double guidance_weight(const DiffusionSchedule& schedule, int t, OmegaKind kind) {
  if (t < 0 || t >= schedule.steps) throw ParameterError("guidance_weight: timestep out of range");
  switch (kind) {
    case OmegaKind::Constant:
      return 1.0;
    case OmegaKind::OneMinusAlphaBar:
    default:
      return 1.0 - schedule.alpha_bars[t];
  }
}

}  // namespace splatstyle
