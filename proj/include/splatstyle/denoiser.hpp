#pragma once

#include <map>
#include <memory>
#include <vector>

#include "splatstyle/conditioning.hpp"
#include "splatstyle/gaussian_cloud.hpp"
#include "splatstyle/image.hpp"
#include "splatstyle/schedule.hpp"

namespace splatstyle {

/// Noise predictor eps_hat(z_t; ctx, t). Implementations must be
/// deterministic for fixed inputs and weights.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual Image predict(const Image& z_t, int t, const ConditioningContext& ctx) const = 0;
};

struct ToyDenoiserConfig {
  int d_model = kContextDim;
  int patch = 8;
  int n_cross_blocks = 1;
  int lora_rank = 4;
  double lora_alpha = 4.0;
};

/// Frozen base weights of the toy predictor: patch encoder, one
/// self-attention block, n decoupled cross-attention blocks, patch decoder.
struct ToyDenoiserWeights {
  ToyDenoiserConfig config;
  MatX patch_embed_w;  // d x 3P^2
  VecX patch_embed_b;
  MatX self_q, self_k, self_v, self_out;  // d x d
  struct CrossBlock {
    MatX q, k, v, out;    // d x d, LoRA-adaptable
    MatX img_k, img_v;    // d x d, style-branch projections
  };
  std::vector<CrossBlock> cross;
  MatX decode_w;  // 3P^2 x d
  VecX decode_b;

  static ToyDenoiserWeights make(const ToyDenoiserConfig& config, uint64_t seed);
};

/// Per-block adapters on the cross-attention q/k/v/out projections.
struct AttentionLora {
  LoraAdapter q, k, v, out;
};

/// Patch-token encoder-decoder noise predictor. Adapters engage only when
/// the context carries a camera token (the LoRA branch); base weights stay
/// frozen.
class ToyDenoiser : public Denoiser {
 public:
  ToyDenoiser(ToyDenoiserWeights weights, uint64_t lora_seed);

  Image predict(const Image& z_t, int t, const ConditioningContext& ctx) const override;

  const ToyDenoiserWeights& weights() const { return weights_; }
  std::vector<AttentionLora>& adapters() { return adapters_; }
  const std::vector<AttentionLora>& adapters() const { return adapters_; }

  /// Zeroes every B and redraws every A; the adapted branch becomes an exact
  /// copy of the base again.
  void reinitialize_adapters(uint64_t seed);

  /// Mutable views of the adapter matrices in a stable order
  /// (block-major, then q.A, q.B, k.A, k.B, v.A, v.B, out.A, out.B).
  std::vector<MatX*> adapter_param_refs();
  std::vector<std::string> adapter_param_names() const;

  /// FNV-1a digest over the frozen base weights, for tamper checks.
  uint64_t base_checksum() const;

  struct LoraLoss {
    double loss = 0;
    std::vector<MatX> adapter_grads;  // parallel to adapter_param_refs()
    VecX camera_token_grad;
  };

  /// Mean-squared diffusion residual ||predict(z_t; empty text, e_c) - eps||^2
  /// with exact gradients for every adapter matrix and the camera token.
  LoraLoss lora_loss_and_grads(const Image& z_t, int t, const VecX& camera_token,
                               const Image& eps) const;

  struct Tape;  // forward intermediates, defined in the implementation

 private:
  Image predict_impl(const Image& z_t, int t, const ConditioningContext& ctx,
                     Tape* tape) const;

  ToyDenoiserWeights weights_;
  std::vector<AttentionLora> adapters_;
};

/// Analytic noise predictor with a closed-form fixed point: eps_hat =
/// (z_t - sqrt(alpha_bar_t) x*) / sigma_t where x* blends a per-view target
/// with a style tile. Guidance built on it vanishes exactly when the render
/// equals x*.
class OracleDenoiser : public Denoiser {
 public:
  explicit OracleDenoiser(DiffusionSchedule schedule);

  void set_target(int camera_id, Image target);
  /// Fallback for unregistered views: render this cloud under ctx.camera.
  void set_reference(GaussianCloud reference, Vec3 background);
  void set_style(Image style_tile, double blend);

  double blend() const { return blend_; }
  Image blended_target(const Image& target) const;

  Image predict(const Image& z_t, int t, const ConditioningContext& ctx) const override;

 private:
  DiffusionSchedule schedule_;
  std::map<int, Image> targets_;
  std::optional<GaussianCloud> reference_;
  Vec3 reference_background_ = Vec3::Ones();
  std::optional<Image> style_;
  double blend_ = 0.0;
};

/// Predicts exactly the noise that perturb() injected, by inverting the
/// perturbation around a known clean image: (z_t - sqrt(alpha_bar_t) x0) /
/// sigma_t. The pipeline points it at the current render each step.
class ExactNoiseOracle : public Denoiser {
 public:
  explicit ExactNoiseOracle(DiffusionSchedule schedule) : schedule_(std::move(schedule)) {}

  void set_clean_image(Image x0) { x0_ = std::move(x0); }

  Image predict(const Image& z_t, int t, const ConditioningContext& ctx) const override;

 private:
  DiffusionSchedule schedule_;
  std::optional<Image> x0_;
};

/// Named view over a dense tensor's storage, for serialization.
struct TensorRef {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  double* data = nullptr;
};

// Weight persistence: raw float64 blob plus a JSON sidecar listing name and
// shape per tensor, in blob order.
void save_weight_blob(const std::filesystem::path& bin_path,
                      const std::filesystem::path& json_path,
                      const std::vector<TensorRef>& tensors);
void load_weight_blob(const std::filesystem::path& bin_path,
                      const std::filesystem::path& json_path,
                      const std::vector<TensorRef>& tensors);

/// Base + adapter tensors of a denoiser plus the projection layer.
std::vector<TensorRef> named_tensors(ToyDenoiser& den, CameraProjection& proj);

}  // namespace splatstyle
