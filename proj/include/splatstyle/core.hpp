#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace splatstyle {

using Scalar = double;

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using VecX = Eigen::VectorXd;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using MatX = Eigen::MatrixXd;
using ArrXX = Eigen::ArrayXXd;
using ArrX = Eigen::ArrayXd;

// Per-item row layout: one Gaussian / token / sample per row.
using PointsX3 = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using PointsX4 = Eigen::Matrix<double, Eigen::Dynamic, 4>;

using MaskXX = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Invalid argument to an operation (shape mismatch, out-of-range value, ...).
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Malformed on-disk data (PLY/PNG/config).
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem / OS-level failure.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Optimization produced non-finite values; carries step diagnostics.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t fnv1a(std::string_view s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Derives an independent stream seed from a master seed and a purpose tag,
/// so draw counts in one stream never perturb another.
inline uint64_t derive_seed(uint64_t master, std::string_view tag) {
  return splitmix64(master ^ fnv1a(tag));
}

/// Deterministic RNG with a fixed cross-platform mapping from raw 64-bit
/// draws to doubles (std::*_distribution sequences are not portable).
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(splitmix64(seed ^ 0x632be59bd9b4e019ULL)) {
    // warm up so nearby seeds decorrelate
    for (int i = 0; i < 4; ++i) next();
  }

  uint64_t next() {
    state_ = splitmix64(state_);
    return state_;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi).
  int64_t uniform_int(int64_t lo, int64_t hi) {
    if (hi <= lo) throw ParameterError("uniform_int: empty range");
    const uint64_t span = static_cast<uint64_t>(hi - lo);
    return lo + static_cast<int64_t>(next() % span);
  }

  /// Standard normal via Box-Muller (one value per pair of draws).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
  }

  /// Independent child stream.
  Rng fork(std::string_view tag) { return Rng(derive_seed(next(), tag)); }

 private:
  uint64_t state_;
};

/// Fills a matrix/array with iid N(0, sigma^2) entries in row-major order.
template <typename Derived>
void fill_normal(Eigen::DenseBase<Derived>& m, Rng& rng, double sigma = 1.0) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = sigma * rng.normal();
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Quantizes to the nearest float32 value; on-disk cloud precision.
inline double to_storage_precision(double x) { return static_cast<double>(static_cast<float>(x)); }

}  // namespace splatstyle
