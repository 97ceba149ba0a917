#include "splatstyle/conditioning.hpp"

namespace splatstyle {

ConditioningContext text_context(MatX text_tokens) {
  ConditioningContext ctx;
  ctx.text_tokens = std::move(text_tokens);
  return ctx;
}

ConditioningContext styled_context(MatX text_tokens, MatX style_tokens, double lambda_scale) {
  if (lambda_scale < 0) throw ParameterError("styled_context: lambda must be >= 0");
  ConditioningContext ctx;
  ctx.text_tokens = std::move(text_tokens);
  ctx.style_tokens = std::move(style_tokens);
  ctx.lambda_scale = lambda_scale;
  return ctx;
}

ConditioningContext lora_context(MatX text_tokens, VecX camera_token) {
  ConditioningContext ctx;
  ctx.text_tokens = std::move(text_tokens);
  ctx.camera_token = std::move(camera_token);
  return ctx;
}

void require_plain_context(const ConditioningContext& ctx, const char* where) {
  if (ctx.has_style() || ctx.has_camera_token())
    throw ParameterError(std::string(where) + ": expected a plain text context");
}

void require_styled_context(const ConditioningContext& ctx, const char* where) {
  if (ctx.has_camera_token())
    throw ParameterError(std::string(where) + ": styled context must not carry a camera token");
  if (!ctx.has_style())
    throw ParameterError(std::string(where) + ": styled context requires style tokens");
}

void require_lora_context(const ConditioningContext& ctx, const char* where) {
  if (ctx.has_style())
    throw ParameterError(std::string(where) + ": LoRA context must not carry style tokens");
  if (!ctx.has_camera_token())
    throw ParameterError(std::string(where) + ": LoRA context requires a camera token");
}

MatX encode_text(const std::string& prompt, int n_tokens, int dim) {
  Rng rng(derive_seed(fnv1a(prompt), "text_encoder"));
  MatX tokens(n_tokens, dim);
  fill_normal(tokens, rng);
  return tokens;
}

MatX encode_style_image(const Image& style, uint64_t seed, int grid, int dim) {
  if (style.height < grid || style.width < grid)
    throw ParameterError("encode_style_image: image smaller than the pooling grid");
  Rng rng(derive_seed(seed, "style_encoder"));
  MatX proj(dim, 3);
  fill_normal(proj, rng);
  VecX bias(dim);
  fill_normal(bias, rng, 0.1);

  MatX tokens(grid * grid, dim);
  for (int gy = 0; gy < grid; ++gy) {
    const int y0 = gy * style.height / grid;
    const int y1 = (gy + 1) * style.height / grid;
    for (int gx = 0; gx < grid; ++gx) {
      const int x0 = gx * style.width / grid;
      const int x1 = (gx + 1) * style.width / grid;
      Vec3 mean;
      for (int c = 0; c < 3; ++c)
        mean[c] = style.ch[c].block(y0, x0, y1 - y0, x1 - x0).mean();
      tokens.row(gy * grid + gx) = (proj * mean + bias).transpose();
    }
  }
  return tokens;
}

MatX cross_attention(const MatX& q, const MatX& k, const MatX& v) {
  if (q.cols() != k.cols()) throw ParameterError("cross_attention: query/key dim mismatch");
  if (k.rows() != v.rows()) throw ParameterError("cross_attention: key/value count mismatch");
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  MatX logits = q * k.transpose() * inv_sqrt_d;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    logits.row(r) = (logits.row(r).array() - m).exp();
    logits.row(r) /= logits.row(r).sum();
  }
  return logits * v;
}

MatX decoupled_cross_attention(const MatX& q, const MatX& k_text, const MatX& v_text,
                               const MatX& k_img, const MatX& v_img, double lambda_scale) {
  MatX out = cross_attention(q, k_text, v_text);
  if (k_img.rows() > 0) out += lambda_scale * cross_attention(q, k_img, v_img);
  return out;
}

LoraAdapter LoraAdapter::fresh(Eigen::Index d_out, Eigen::Index d_in, Eigen::Index rank,
                               double alpha, Rng& rng) {
  if (rank < 1 || rank > std::min(d_out, d_in))
    throw ParameterError("LoraAdapter: invalid rank");
  LoraAdapter ad;
  ad.alpha = alpha;
  ad.a.resize(rank, d_in);
  fill_normal(ad.a, rng, 1.0 / std::sqrt(static_cast<double>(d_in)));
  ad.b = MatX::Zero(d_out, rank);
  return ad;
}

void LoraAdapter::reinitialize(Rng& rng) {
  fill_normal(a, rng, 1.0 / std::sqrt(static_cast<double>(a.cols())));
  b.setZero();
}

VecX lora_forward(const MatX& weight, const LoraAdapter& adapter, const VecX& x) {
  if (x.size() != weight.cols()) throw ParameterError("lora_forward: input dim mismatch");
  if (adapter.a.cols() != weight.cols() || adapter.b.rows() != weight.rows() ||
      adapter.a.rows() != adapter.b.cols())
    throw ParameterError("lora_forward: adapter rank/shape mismatch");
  return weight * x + adapter.scale() * (adapter.b * (adapter.a * x));
}

MatX lora_forward_tokens(const MatX& weight, const LoraAdapter& adapter, const MatX& x) {
  if (x.cols() != weight.cols()) throw ParameterError("lora_forward_tokens: input dim mismatch");
  if (adapter.a.cols() != weight.cols() || adapter.b.rows() != weight.rows() ||
      adapter.a.rows() != adapter.b.cols())
    throw ParameterError("lora_forward_tokens: adapter rank/shape mismatch");
  return x * weight.transpose() +
         adapter.scale() * (x * adapter.a.transpose()) * adapter.b.transpose();
}

CameraProjection CameraProjection::init(int dim, uint64_t seed) {
  Rng rng(derive_seed(seed, "camera_projection"));
  CameraProjection proj;
  proj.weight.resize(dim, 12);
  fill_normal(proj.weight, rng, 0.1);
  proj.bias = VecX::Zero(dim);
  return proj;
}

}  // namespace splatstyle
