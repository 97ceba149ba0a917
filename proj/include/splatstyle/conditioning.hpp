#pragma once

#include <optional>
#include <string>

#include "splatstyle/camera.hpp"
#include "splatstyle/core.hpp"
#include "splatstyle/image.hpp"

namespace splatstyle {

/// Context token width shared by every encoder and the denoiser blocks.
inline constexpr int kContextDim = 32;
inline constexpr int kTextTokens = 8;

/// Conditioning bundle handed to a noise predictor. The styled branch
/// carries style tokens (and the adapter scale lambda); the LoRA branch
/// carries a camera token; a plain text branch carries neither. camera_id /
/// camera are routing metadata for analytic oracle denoisers and are ignored
/// by learned predictors.
struct ConditioningContext {
  MatX text_tokens;                         // (m x d), m may be 0
  std::optional<MatX> style_tokens;         // (k x d)
  std::optional<VecX> camera_token;         // (d)
  double lambda_scale = 0.0;
  int camera_id = -1;
  std::optional<PinholeCamera> camera;

  bool has_style() const { return style_tokens.has_value(); }
  bool has_camera_token() const { return camera_token.has_value(); }
};

ConditioningContext text_context(MatX text_tokens);
ConditioningContext styled_context(MatX text_tokens, MatX style_tokens, double lambda_scale);
ConditioningContext lora_context(MatX text_tokens, VecX camera_token);

/// Branch invariants: a styled context must not carry a camera token and a
/// LoRA context must not carry style tokens.
void require_plain_context(const ConditioningContext& ctx, const char* where);
void require_styled_context(const ConditioningContext& ctx, const char* where);
void require_lora_context(const ConditioningContext& ctx, const char* where);

/// Prompt -> deterministic pseudo-random token sequence (hash-seeded). Stands
/// in for a text encoder; only dimensionality and determinism matter.
MatX encode_text(const std::string& prompt, int n_tokens = kTextTokens, int dim = kContextDim);

/// Style image -> 4x4 grid of average-pooled RGB cells, linearly projected to
/// tokens with a seed-fixed map.
MatX encode_style_image(const Image& style, uint64_t seed, int grid = 4, int dim = kContextDim);

/// Row-wise softmax(Q K^T / sqrt(d)) V.
MatX cross_attention(const MatX& q, const MatX& k, const MatX& v);

/// Decoupled cross-attention: CA(Q, K_y, V_y) + lambda * CA(Q, K_I, V_I).
MatX decoupled_cross_attention(const MatX& q, const MatX& k_text, const MatX& v_text,
                               const MatX& k_img, const MatX& v_img, double lambda_scale);

/// Low-rank additive update for a frozen weight matrix: effective weight
/// W + (alpha/r) B A. Fresh adapters have B = 0 and are exact no-ops.
struct LoraAdapter {
  MatX a;  // r x d_in
  MatX b;  // d_out x r
  double alpha = 0;

  Eigen::Index rank() const { return a.rows(); }
  double scale() const { return alpha / static_cast<double>(a.rows()); }
  MatX delta() const { return scale() * b * a; }

  static LoraAdapter fresh(Eigen::Index d_out, Eigen::Index d_in, Eigen::Index rank,
                           double alpha, Rng& rng);
  /// New A, zeroed B; removes any learned delta.
  void reinitialize(Rng& rng);
};

/// W x + (alpha/r) B (A x) for a single vector.
VecX lora_forward(const MatX& weight, const LoraAdapter& adapter, const VecX& x);

/// Token-matrix form: X W^T + (alpha/r) (X A^T) B^T, one token per row.
MatX lora_forward_tokens(const MatX& weight, const LoraAdapter& adapter, const MatX& x);

/// Learned linear map from flattened extrinsics to a context token.
struct CameraProjection {
  MatX weight;  // d x 12
  VecX bias;    // d

  VecX embed(const Eigen::Matrix<double, 12, 1>& flat) const { return weight * flat + bias; }
  VecX embed(const PinholeCamera& cam) const { return embed(flatten_extrinsics(cam)); }

  static CameraProjection init(int dim, uint64_t seed);
};

}  // namespace splatstyle
