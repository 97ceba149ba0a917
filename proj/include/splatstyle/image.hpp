#pragma once

#include <array>
#include <filesystem>

#include "splatstyle/core.hpp"

namespace splatstyle {

/// Planar RGB image, each channel a (height x width) array, values in [0, 1]
/// for displayable content (gradients and residuals reuse the type unbounded).
struct Image {
  int height = 0;
  int width = 0;
  std::array<ArrXX, 3> ch;

  Image() = default;
  Image(int h, int w) : height(h), width(w) {
    for (auto& c : ch) c = ArrXX::Zero(h, w);
  }

  static Image zeros(int h, int w) { return Image(h, w); }

  static Image constant(int h, int w, const Vec3& rgb) {
    Image img(h, w);
    for (int c = 0; c < 3; ++c) img.ch[c].setConstant(rgb[c]);
    return img;
  }

  bool same_shape(const Image& o) const { return height == o.height && width == o.width; }

  Eigen::Index pixels() const { return static_cast<Eigen::Index>(height) * width; }

  Vec3 at(int y, int x) const { return {ch[0](y, x), ch[1](y, x), ch[2](y, x)}; }
};

inline Image operator+(const Image& a, const Image& b) {
  Image out(a.height, a.width);
  for (int c = 0; c < 3; ++c) out.ch[c] = a.ch[c] + b.ch[c];
  return out;
}

inline Image operator-(const Image& a, const Image& b) {
  Image out(a.height, a.width);
  for (int c = 0; c < 3; ++c) out.ch[c] = a.ch[c] - b.ch[c];
  return out;
}

inline Image operator*(double s, const Image& a) {
  Image out(a.height, a.width);
  for (int c = 0; c < 3; ++c) out.ch[c] = s * a.ch[c];
  return out;
}

inline double dot(const Image& a, const Image& b) {
  double s = 0;
  for (int c = 0; c < 3; ++c) s += (a.ch[c] * b.ch[c]).sum();
  return s;
}

inline double squared_norm(const Image& a) { return dot(a, a); }

inline double norm(const Image& a) { return std::sqrt(squared_norm(a)); }

inline double max_abs_diff(const Image& a, const Image& b) {
  double m = 0;
  for (int c = 0; c < 3; ++c) m = std::max(m, (a.ch[c] - b.ch[c]).abs().maxCoeff());
  return m;
}

inline bool all_finite(const Image& a) {
  for (int c = 0; c < 3; ++c)
    if (!a.ch[c].isFinite().all()) return false;
  return true;
}

/// Multiplies every channel by a per-pixel weight map.
inline Image weighted(const Image& a, const ArrXX& w) {
  Image out(a.height, a.width);
  for (int c = 0; c < 3; ++c) out.ch[c] = a.ch[c] * w;
  return out;
}

/// Box-filter resize (area averaging); used to bring style images to the
/// render resolution.
Image resize_box(const Image& src, int out_h, int out_w);

// 8-bit PNG round trip. Values clamped to [0, 1] on write; grayscale and
// RGBA inputs are promoted to RGB on read.
void write_png(const std::filesystem::path& path, const Image& img);
void write_png_gray(const std::filesystem::path& path, const ArrXX& gray);
Image read_png(const std::filesystem::path& path);

/// Horizontal concatenation for side-by-side strips.
Image hconcat(const std::vector<Image>& imgs);

}  // namespace splatstyle
