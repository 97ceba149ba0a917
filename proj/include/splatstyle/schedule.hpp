#pragma once

#include "splatstyle/core.hpp"
#include "splatstyle/image.hpp"

namespace splatstyle {

/// DDPM forward-process bookkeeping: betas, cumulative alpha products and the
/// perturbation noise scale sigma_t = sqrt(1 - alpha_bar_t).
struct DiffusionSchedule {
  int steps = 0;
  VecX betas;
  VecX alpha_bars;
  VecX sigmas;
};

/// Linear beta schedule on [beta_min, beta_max] over T steps.
DiffusionSchedule make_schedule(int steps, double beta_min, double beta_max);

inline DiffusionSchedule default_schedule() { return make_schedule(1000, 1e-4, 2e-2); }

/// z_t = sqrt(alpha_bar_t) x0 + sigma_t eps.
Image perturb(const Image& x0, int t, const Image& eps, const DiffusionSchedule& schedule);

/// Uniform integer timestep in [t_lo_frac*T, t_hi_frac*T).
int sample_timestep(Rng& rng, double t_lo_frac, double t_hi_frac,
                    const DiffusionSchedule& schedule);

enum class OmegaKind { OneMinusAlphaBar, Constant };

/// Guidance weight omega(t); strictly increasing in t for the default kind.
double guidance_weight(const DiffusionSchedule& schedule, int t,
                       OmegaKind kind = OmegaKind::OneMinusAlphaBar);

}  // namespace splatstyle
