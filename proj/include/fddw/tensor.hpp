#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "fddw/errors.hpp"

namespace fddw {

// Dense (batch, channels, height, width) shape. Row-major layout with the
// width index fastest.
struct Shape4 {
  int b = 0;
  int c = 0;
  int h = 0;
  int w = 0;

  int64_t numel() const {
    return static_cast<int64_t>(b) * c * h * w;
  }

  bool operator==(const Shape4&) const = default;

  std::string str() const {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%dx%dx%dx%d", b, c, h, w);
    return buf;
  }
};

// Dense rank-4 tensor. The production scalar type is float; double is used
// by the gradient-checking paths.
template <typename T>
class TensorT {
 public:
  TensorT() = default;

  explicit TensorT(Shape4 shape, T fill = T(0))
      : shape_(shape), data_(static_cast<size_t>(shape.numel()), fill) {}

  static TensorT from_data(Shape4 shape, std::vector<T> values) {
    if (static_cast<int64_t>(values.size()) != shape.numel()) {
      throw ShapeMismatch("tensor data length " + std::to_string(values.size()) +
                          " does not match shape " + shape.str());
    }
    TensorT t;
    t.shape_ = shape;
    t.data_ = std::move(values);
    return t;
  }

  const Shape4& shape() const { return shape_; }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  T& at(int b, int c, int y, int x) {
    return data_[offset(b, c, y, x)];
  }
  T at(int b, int c, int y, int x) const {
    return data_[offset(b, c, y, x)];
  }

  // Pointer to the (b, c) spatial plane of h*w contiguous values.
  T* plane(int b, int c) { return data_.data() + offset(b, c, 0, 0); }
  const T* plane(int b, int c) const { return data_.data() + offset(b, c, 0, 0); }

  int64_t plane_size() const { return static_cast<int64_t>(shape_.h) * shape_.w; }

  bool operator==(const TensorT&) const = default;

  template <typename U>
  TensorT<U> cast() const {
    TensorT<U> out(shape_);
    for (int64_t i = 0; i < numel(); ++i) out.data()[i] = static_cast<U>(data_[i]);
    return out;
  }

 private:
  size_t offset(int b, int c, int y, int x) const {
    return ((static_cast<size_t>(b) * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }

  Shape4 shape_;
  std::vector<T> data_;
};

using Tensor = TensorT<float>;

// Deterministic 64-bit generator (xorshift64*). State update:
//   s ^= s >> 12;  s ^= s << 25;  s ^= s >> 27;  output = s * 0x2545F4914F6CDD1D
// The seed is whitened once through splitmix64 so that small consecutive
// seeds give unrelated streams. Identical seeds give identical sequences on
// every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t z = seed + 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    z = z ^ (z >> 31);
    state_ = z ? z : 0x9E3779B97F4A7C15ull;
  }

  uint64_t next_u64() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1Dull;
  }

  // Uniform double in [0, 1), 53 significant bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
  }

  float uniform_float(float lo, float hi) {
    return static_cast<float>(uniform(lo, hi));
  }

  // Uniform integer in [0, n).
  int64_t uniform_int(int64_t n) {
    return static_cast<int64_t>(uniform() * static_cast<double>(n));
  }

 private:
  uint64_t state_;
};

template <typename T>
TensorT<T> random_tensor(Shape4 shape, Rng& rng, T lo = T(-1), T hi = T(1)) {
  TensorT<T> t(shape);
  for (int64_t i = 0; i < t.numel(); ++i) {
    t.data()[i] = static_cast<T>(rng.uniform(static_cast<double>(lo), static_cast<double>(hi)));
  }
  return t;
}

namespace detail {

inline void require_same_shape(const Shape4& a, const Shape4& b, const char* op) {
  if (!(a == b)) {
    throw ShapeMismatch(std::string(op) + ": shape " + a.str() + " vs " + b.str());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise and shape primitives.
// ---------------------------------------------------------------------------

template <typename T>
TensorT<T> zero_pad(const TensorT<T>& t, int top, int bottom, int left, int right) {
  if (top < 0 || bottom < 0 || left < 0 || right < 0) {
    throw ShapeMismatch("zero_pad: negative padding");
  }
  const Shape4 s = t.shape();
  TensorT<T> out({s.b, s.c, s.h + top + bottom, s.w + left + right});
  for (int b = 0; b < s.b; ++b) {
    for (int c = 0; c < s.c; ++c) {
      const T* src = t.plane(b, c);
      T* dst = out.plane(b, c);
      for (int y = 0; y < s.h; ++y) {
        std::copy(src + static_cast<int64_t>(y) * s.w,
                  src + static_cast<int64_t>(y + 1) * s.w,
                  dst + static_cast<int64_t>(y + top) * (s.w + left + right) + left);
      }
    }
  }
  return out;
}

// Inverse of zero_pad with the same margins.
template <typename T>
TensorT<T> center_crop(const TensorT<T>& t, int top, int bottom, int left, int right) {
  const Shape4 s = t.shape();
  const int h = s.h - top - bottom;
  const int w = s.w - left - right;
  if (h <= 0 || w <= 0) throw ShapeMismatch("center_crop: margins exceed tensor");
  TensorT<T> out({s.b, s.c, h, w});
  for (int b = 0; b < s.b; ++b) {
    for (int c = 0; c < s.c; ++c) {
      const T* src = t.plane(b, c);
      T* dst = out.plane(b, c);
      for (int y = 0; y < h; ++y) {
        const T* row = src + static_cast<int64_t>(y + top) * s.w + left;
        std::copy(row, row + w, dst + static_cast<int64_t>(y) * w);
      }
    }
  }
  return out;
}

// 2x2 max pooling with stride 2. Also reports, per output element, which of
// the four window positions (2*dy + dx) held the max; backward routes
// gradients through that index.
template <typename T>
TensorT<T> max_pool_2x2_argmax(const TensorT<T>& t, std::vector<uint8_t>* argmax) {
  const Shape4 s = t.shape();
  if (s.h % 2 != 0 || s.w % 2 != 0) {
    throw OddSpatialDim("max_pool_2x2: spatial dims " + s.str() + " must be even");
  }
  TensorT<T> out({s.b, s.c, s.h / 2, s.w / 2});
  if (argmax) argmax->assign(static_cast<size_t>(out.numel()), 0);
  int64_t oi = 0;
  for (int b = 0; b < s.b; ++b) {
    for (int c = 0; c < s.c; ++c) {
      const T* src = t.plane(b, c);
      T* dst = out.plane(b, c);
      for (int y = 0; y < s.h; y += 2) {
        for (int x = 0; x < s.w; x += 2, ++oi) {
          const T v00 = src[static_cast<int64_t>(y) * s.w + x];
          const T v01 = src[static_cast<int64_t>(y) * s.w + x + 1];
          const T v10 = src[static_cast<int64_t>(y + 1) * s.w + x];
          const T v11 = src[static_cast<int64_t>(y + 1) * s.w + x + 1];
          T best = v00;
          uint8_t idx = 0;
          if (v01 > best) { best = v01; idx = 1; }
          if (v10 > best) { best = v10; idx = 2; }
          if (v11 > best) { best = v11; idx = 3; }
          dst[(static_cast<int64_t>(y) / 2) * (s.w / 2) + x / 2] = best;
          if (argmax) (*argmax)[oi] = idx;
        }
      }
    }
  }
  return out;
}

template <typename T>
TensorT<T> max_pool_2x2(const TensorT<T>& t) {
  return max_pool_2x2_argmax<T>(t, nullptr);
}

template <typename T>
TensorT<T> add(const TensorT<T>& a, const TensorT<T>& b) {
  detail::require_same_shape(a.shape(), b.shape(), "add");
  TensorT<T> out(a.shape());
  const T* pa = a.data();
  const T* pb = b.data();
  T* po = out.data();
  for (int64_t i = 0; i < a.numel(); ++i) po[i] = pa[i] + pb[i];
  return out;
}

template <typename T>
TensorT<T> concat_channels(const TensorT<T>& a, const TensorT<T>& b) {
  const Shape4 sa = a.shape();
  const Shape4 sb = b.shape();
  if (sa.b != sb.b || sa.h != sb.h || sa.w != sb.w) {
    throw ShapeMismatch("concat_channels: " + sa.str() + " vs " + sb.str());
  }
  TensorT<T> out({sa.b, sa.c + sb.c, sa.h, sa.w});
  for (int bi = 0; bi < sa.b; ++bi) {
    for (int c = 0; c < sa.c; ++c) {
      std::copy(a.plane(bi, c), a.plane(bi, c) + a.plane_size(), out.plane(bi, c));
    }
    for (int c = 0; c < sb.c; ++c) {
      std::copy(b.plane(bi, c), b.plane(bi, c) + b.plane_size(), out.plane(bi, sa.c + c));
    }
  }
  return out;
}

template <typename T>
TensorT<T> relu(const TensorT<T>& t) {
  TensorT<T> out(t.shape());
  const T* p = t.data();
  T* po = out.data();
  for (int64_t i = 0; i < t.numel(); ++i) po[i] = p[i] > T(0) ? p[i] : T(0);
  return out;
}

// Per-channel (x - mean) / sqrt(var + eps) * gamma + beta.
template <typename T>
TensorT<T> batch_norm(const TensorT<T>& t, const std::vector<T>& mean,
                      const std::vector<T>& var, const std::vector<T>& gamma,
                      const std::vector<T>& beta, T eps) {
  const Shape4 s = t.shape();
  const size_t c = static_cast<size_t>(s.c);
  if (mean.size() != c || var.size() != c || gamma.size() != c || beta.size() != c) {
    throw ShapeMismatch("batch_norm: parameter vectors must have length " +
                        std::to_string(s.c));
  }
  for (T v : var) {
    if (v < T(0)) throw ShapeMismatch("batch_norm: negative variance");
  }
  TensorT<T> out(s);
  for (int b = 0; b < s.b; ++b) {
    for (int ch = 0; ch < s.c; ++ch) {
      const T scale = gamma[ch] / std::sqrt(var[ch] + eps);
      const T shift = beta[ch] - mean[ch] * scale;
      const T* src = t.plane(b, ch);
      T* dst = out.plane(b, ch);
      for (int64_t i = 0; i < t.plane_size(); ++i) dst[i] = src[i] * scale + shift;
    }
  }
  return out;
}

}  // namespace fddw
