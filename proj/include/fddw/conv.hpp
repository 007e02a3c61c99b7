#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fddw/parallel.hpp"
#include "fddw/tensor.hpp"

namespace fddw {

enum class ConvKind {
  standard,
  grouped,
  factorized1d,
  depthwise,
  dilated_depthwise,
  fddwc,
  pointwise,
  transposed,
};

const char* conv_kind_name(ConvKind kind);

// Declarative description of one convolution. n is the kernel size, r the
// dilation rate, g the group count; the effective kernel extent is
// n_r = (n - 1) * r + 1.
struct ConvSpec {
  ConvKind kind = ConvKind::standard;
  int n = 3;
  int r = 1;
  int g = 1;
  int c = 0;       // in-channels
  int c_hat = 0;   // out-channels
  int stride = 1;
  bool bias = false;

  void validate() const;  // throws UnsupportedSpec on any invariant violation
};

// Kernel tensors per kind, in fixed order:
//   standard/grouped:       [c_hat x c/g x n x n]
//   depthwise variants:     [c x 1 x n x n, c_hat x c x 1 x 1]  (spatial + pointwise)
//   factorized1d:           [c_hat x c x 1 x n, c_hat x c_hat x n x 1]
//   fddwc:                  [c x 1 x 1 x n, c x 1 x n x 1, c_hat x c x 1 x 1]
//   pointwise:              [c_hat x c x 1 x 1]
//   transposed:             [c x c_hat x n x n]
template <typename T>
struct ConvWeightsT {
  std::vector<TensorT<T>> kernels;
  std::vector<T> bias;  // empty when the spec has no bias

  int64_t element_count() const {
    int64_t n = 0;
    for (const auto& k : kernels) n += k.numel();
    return n;
  }
};

using ConvWeights = ConvWeightsT<float>;

// Table-driven parameter count: standard n^2*c*c_hat; grouped n^2*c*c_hat/g;
// 1D-factorized 2*n*c*c_hat; depthwise variants n^2*c + c*c_hat; fddwc
// 2*n*c + c*c_hat; pointwise c*c_hat; transposed n^2*c*c_hat; plus c_hat for
// a bias.
int64_t param_count(const ConvSpec& spec);

// Same formulas as pure arithmetic, without ConvSpec validation. Used for
// what-if analyses over parameter grids.
int64_t param_count_formula(ConvKind kind, int n, int c, int c_hat, int g);

// Effective receptive-field extent (n - 1) * r + 1 of an n-tap kernel at
// dilation rate r.
int receptive_field(int n, int r);

int effective_extent(int n, int r);  // same formula, no oddness requirement on n

// Allocates zero kernels (and bias) of the right shapes for the spec.
template <typename T>
ConvWeightsT<T> make_weights(const ConvSpec& spec);

// Fills w with fan-in-scaled uniform values from rng: each kernel element is
// drawn from U(-1/sqrt(fan_in), 1/sqrt(fan_in)) where fan_in is the number
// of inputs feeding one output activation of that kernel.
template <typename T>
void init_weights(const ConvSpec& spec, ConvWeightsT<T>& w, Rng& rng);

enum class Orientation { horizontal, vertical };

// ---------------------------------------------------------------------------
// Brute-force reference convolution: direct nested-loop cross-correlation
// with dilation, groups, stride, and "same" zero padding of (extent - 1) / 2
// per active axis. Handles standard, grouped, depthwise, dilated_depthwise
// and pointwise kinds; composite kinds (factorized1d, fddwc) and transposed
// raise UnsupportedSpec. This is the oracle every specialized path is tested
// against, so it stays naive on purpose.
// ---------------------------------------------------------------------------
template <typename T>
TensorT<T> conv2d_reference(const TensorT<T>& x, const ConvSpec& spec,
                            const ConvWeightsT<T>& w);

// Per-pixel linear map of the channel vector; w.kernels[0] is c_hat x c x 1 x 1.
template <typename T>
TensorT<T> conv_pointwise(const TensorT<T>& x, const ConvWeightsT<T>& w);

// Each channel convolved independently with its own 1 x n (horizontal) or
// n x 1 (vertical) kernel at dilation r; "same" zero padding on the active
// axis only. w is shaped c x 1 x 1 x n (horizontal) or c x 1 x n x 1.
template <typename T>
TensorT<T> conv_depthwise_1d(const TensorT<T>& x, Orientation orient, int n,
                             int r, const TensorT<T>& w);

// Factorized dilated depth-wise separable convolution: horizontal depthwise,
// vertical depthwise (both at dilation r), then pointwise channel mixing.
template <typename T>
TensorT<T> fddwc(const TensorT<T>& x, int n, int r, const ConvWeightsT<T>& w);

// Transposed convolution, defined by the scatter rule: every input value
// adds value * kernel into the output at offset (i*stride - pad + k) per
// axis, with pad = (n-1)/2 and output padding stride-1, so stride 2 doubles
// the spatial dims exactly. Implemented as an equivalent gather so output
// elements are independent.
template <typename T>
TensorT<T> conv_transposed(const TensorT<T>& x, const ConvSpec& spec,
                           const ConvWeightsT<T>& w);

// ---------------------------------------------------------------------------
// Implementation.
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void require_kernel_shape(const TensorT<T>& k, Shape4 want, const char* what) {
  if (!(k.shape() == want)) {
    throw ShapeMismatch(std::string(what) + ": kernel shape " + k.shape().str() +
                        ", expected " + want.str());
  }
}

inline int conv_out_size(int in, int stride) {
  return (in + stride - 1) / stride;  // ceil(in / stride), same padding
}

}  // namespace detail

template <typename T>
TensorT<T> conv2d_reference(const TensorT<T>& x, const ConvSpec& spec,
                            const ConvWeightsT<T>& w) {
  spec.validate();
  if (spec.kind == ConvKind::transposed || spec.kind == ConvKind::fddwc ||
      spec.kind == ConvKind::factorized1d) {
    throw UnsupportedSpec(std::string("conv2d_reference: ") +
                          conv_kind_name(spec.kind) + " has a dedicated operation");
  }
  const Shape4 s = x.shape();
  if (s.c != spec.c) {
    throw ShapeMismatch("conv2d_reference: input has " + std::to_string(s.c) +
                        " channels, spec expects " + std::to_string(spec.c));
  }
  // Depthwise kinds run as grouped convolution with one channel per group.
  const int groups = (spec.kind == ConvKind::depthwise ||
                      spec.kind == ConvKind::dilated_depthwise)
                         ? spec.c
                         : spec.g;
  const TensorT<T>& kernel = w.kernels.at(0);
  const Shape4 ks = kernel.shape();
  if (ks.b != spec.c_hat || ks.c != spec.c / groups) {
    throw ShapeMismatch("conv2d_reference: kernel shape " + ks.str() +
                        " inconsistent with spec channels/groups");
  }
  const int kh = ks.h;
  const int kw = ks.w;
  const int r = spec.r;
  const int pad_y = ((kh - 1) * r) / 2;
  const int pad_x = ((kw - 1) * r) / 2;
  const int stride = spec.stride;
  const int oh = detail::conv_out_size(s.h, stride);
  const int ow = detail::conv_out_size(s.w, stride);
  const int in_per_group = spec.c / groups;
  const int out_per_group = spec.c_hat / groups;
  if (!w.bias.empty() && static_cast<int>(w.bias.size()) != spec.c_hat) {
    throw ShapeMismatch("conv2d_reference: bias length mismatch");
  }

  TensorT<T> y({s.b, spec.c_hat, oh, ow});
  parallel_for(static_cast<int64_t>(s.b) * spec.c_hat, [&](int64_t lo, int64_t hi) {
    for (int64_t job = lo; job < hi; ++job) {
      const int b = static_cast<int>(job / spec.c_hat);
      const int oc = static_cast<int>(job % spec.c_hat);
      const int group = oc / out_per_group;
      T* dst = y.plane(b, oc);
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          T acc = w.bias.empty() ? T(0) : w.bias[oc];
          for (int ic = 0; ic < in_per_group; ++ic) {
            const T* src = x.plane(b, group * in_per_group + ic);
            for (int ky = 0; ky < kh; ++ky) {
              const int iy = oy * stride - pad_y + ky * r;
              if (iy < 0 || iy >= s.h) continue;
              for (int kx = 0; kx < kw; ++kx) {
                const int ix = ox * stride - pad_x + kx * r;
                if (ix < 0 || ix >= s.w) continue;
                acc += kernel.at(oc, ic, ky, kx) * src[static_cast<int64_t>(iy) * s.w + ix];
              }
            }
          }
          dst[static_cast<int64_t>(oy) * ow + ox] = acc;
        }
      }
    }
  });
  return y;
}

template <typename T>
TensorT<T> conv_pointwise(const TensorT<T>& x, const ConvWeightsT<T>& w) {
  const Shape4 s = x.shape();
  const TensorT<T>& kernel = w.kernels.at(0);
  const Shape4 ks = kernel.shape();
  if (ks.c != s.c || ks.h != 1 || ks.w != 1) {
    throw ShapeMismatch("conv_pointwise: kernel " + ks.str() + " vs input " + s.str());
  }
  const int c_hat = ks.b;
  if (!w.bias.empty() && static_cast<int>(w.bias.size()) != c_hat) {
    throw ShapeMismatch("conv_pointwise: bias length mismatch");
  }
  const int64_t hw = x.plane_size();
  TensorT<T> y({s.b, c_hat, s.h, s.w});
  parallel_for(static_cast<int64_t>(s.b) * c_hat, [&](int64_t lo, int64_t hi) {
    for (int64_t job = lo; job < hi; ++job) {
      const int b = static_cast<int>(job / c_hat);
      const int oc = static_cast<int>(job % c_hat);
      T* dst = y.plane(b, oc);
      const T init = w.bias.empty() ? T(0) : w.bias[oc];
      for (int64_t i = 0; i < hw; ++i) dst[i] = init;
      const T* kr = kernel.data() + static_cast<int64_t>(oc) * s.c;
      for (int ic = 0; ic < s.c; ++ic) {
        const T kv = kr[ic];
        const T* src = x.plane(b, ic);
        for (int64_t i = 0; i < hw; ++i) dst[i] += kv * src[i];
      }
    }
  });
  return y;
}

template <typename T>
TensorT<T> conv_depthwise_1d(const TensorT<T>& x, Orientation orient, int n,
                             int r, const TensorT<T>& w) {
  const Shape4 s = x.shape();
  const Shape4 want = orient == Orientation::horizontal ? Shape4{s.c, 1, 1, n}
                                                        : Shape4{s.c, 1, n, 1};
  detail::require_kernel_shape(w, want, "conv_depthwise_1d");
  if (n < 1 || r < 1) throw UnsupportedSpec("conv_depthwise_1d: n and r must be positive");
  const int pad = ((n - 1) * r) / 2;
  TensorT<T> y(s);
  parallel_for(static_cast<int64_t>(s.b) * s.c, [&](int64_t lo, int64_t hi) {
    for (int64_t job = lo; job < hi; ++job) {
      const int b = static_cast<int>(job / s.c);
      const int c = static_cast<int>(job % s.c);
      const T* src = x.plane(b, c);
      T* dst = y.plane(b, c);
      const T* kv = w.data() + static_cast<int64_t>(c) * n;
      if (orient == Orientation::horizontal) {
        for (int yy = 0; yy < s.h; ++yy) {
          const T* row = src + static_cast<int64_t>(yy) * s.w;
          T* out = dst + static_cast<int64_t>(yy) * s.w;
          for (int xx = 0; xx < s.w; ++xx) {
            T acc = T(0);
            for (int k = 0; k < n; ++k) {
              const int ix = xx - pad + k * r;
              if (ix >= 0 && ix < s.w) acc += kv[k] * row[ix];
            }
            out[xx] = acc;
          }
        }
      } else {
        std::fill(dst, dst + y.plane_size(), T(0));
        for (int yy = 0; yy < s.h; ++yy) {
          T* out = dst + static_cast<int64_t>(yy) * s.w;
          for (int k = 0; k < n; ++k) {
            const int iy = yy - pad + k * r;
            if (iy < 0 || iy >= s.h) continue;
            const T* row = src + static_cast<int64_t>(iy) * s.w;
            const T kval = kv[k];
            for (int xx = 0; xx < s.w; ++xx) out[xx] += kval * row[xx];
          }
        }
      }
    }
  });
  return y;
}

template <typename T>
TensorT<T> fddwc(const TensorT<T>& x, int n, int r, const ConvWeightsT<T>& w) {
  if (w.kernels.size() != 3) {
    throw ShapeMismatch("fddwc: expected horizontal, vertical and pointwise kernels");
  }
  TensorT<T> t = conv_depthwise_1d(x, Orientation::horizontal, n, r, w.kernels[0]);
  t = conv_depthwise_1d(t, Orientation::vertical, n, r, w.kernels[1]);
  ConvWeightsT<T> pw;
  pw.kernels.push_back(w.kernels[2]);
  pw.bias = w.bias;
  return conv_pointwise(t, pw);
}

template <typename T>
TensorT<T> conv_transposed(const TensorT<T>& x, const ConvSpec& spec,
                           const ConvWeightsT<T>& w) {
  spec.validate();
  if (spec.kind != ConvKind::transposed) {
    throw UnsupportedSpec("conv_transposed: spec kind must be transposed");
  }
  const Shape4 s = x.shape();
  if (s.c != spec.c) {
    throw ShapeMismatch("conv_transposed: input channels " + std::to_string(s.c) +
                        " vs spec " + std::to_string(spec.c));
  }
  const TensorT<T>& kernel = w.kernels.at(0);
  detail::require_kernel_shape(kernel, {spec.c, spec.c_hat, spec.n, spec.n},
                               "conv_transposed");
  if (!w.bias.empty() && static_cast<int>(w.bias.size()) != spec.c_hat) {
    throw ShapeMismatch("conv_transposed: bias length mismatch");
  }
  const int n = spec.n;
  const int stride = spec.stride;
  const int pad = (n - 1) / 2;
  const int out_pad = stride - 1;
  const int oh = (s.h - 1) * stride - 2 * pad + n + out_pad;
  const int ow = (s.w - 1) * stride - 2 * pad + n + out_pad;

  TensorT<T> y({s.b, spec.c_hat, oh, ow});
  parallel_for(static_cast<int64_t>(s.b) * spec.c_hat, [&](int64_t lo, int64_t hi) {
    for (int64_t job = lo; job < hi; ++job) {
      const int b = static_cast<int>(job / spec.c_hat);
      const int oc = static_cast<int>(job % spec.c_hat);
      T* dst = y.plane(b, oc);
      for (int oy = 0; oy < oh; ++oy) {
        for (int ox = 0; ox < ow; ++ox) {
          T acc = w.bias.empty() ? T(0) : w.bias[oc];
          for (int ky = 0; ky < n; ++ky) {
            const int ty = oy + pad - ky;
            if (ty < 0 || ty % stride != 0) continue;
            const int iy = ty / stride;
            if (iy >= s.h) continue;
            for (int kx = 0; kx < n; ++kx) {
              const int tx = ox + pad - kx;
              if (tx < 0 || tx % stride != 0) continue;
              const int ix = tx / stride;
              if (ix >= s.w) continue;
              for (int ic = 0; ic < s.c; ++ic) {
                acc += kernel.at(ic, oc, ky, kx) *
                       x.at(b, ic, iy, ix);
              }
            }
          }
          dst[static_cast<int64_t>(oy) * ow + ox] = acc;
        }
      }
    }
  });
  return y;
}

template <typename T>
ConvWeightsT<T> make_weights(const ConvSpec& spec) {
  spec.validate();
  ConvWeightsT<T> w;
  switch (spec.kind) {
    case ConvKind::standard:
    case ConvKind::grouped:
      w.kernels.emplace_back(Shape4{spec.c_hat, spec.c / spec.g, spec.n, spec.n});
      break;
    case ConvKind::depthwise:
    case ConvKind::dilated_depthwise:
      w.kernels.emplace_back(Shape4{spec.c, 1, spec.n, spec.n});
      w.kernels.emplace_back(Shape4{spec.c_hat, spec.c, 1, 1});
      break;
    case ConvKind::factorized1d:
      w.kernels.emplace_back(Shape4{spec.c_hat, spec.c, 1, spec.n});
      w.kernels.emplace_back(Shape4{spec.c_hat, spec.c_hat, spec.n, 1});
      break;
    case ConvKind::fddwc:
      w.kernels.emplace_back(Shape4{spec.c, 1, 1, spec.n});
      w.kernels.emplace_back(Shape4{spec.c, 1, spec.n, 1});
      w.kernels.emplace_back(Shape4{spec.c_hat, spec.c, 1, 1});
      break;
    case ConvKind::pointwise:
      w.kernels.emplace_back(Shape4{spec.c_hat, spec.c, 1, 1});
      break;
    case ConvKind::transposed:
      w.kernels.emplace_back(Shape4{spec.c, spec.c_hat, spec.n, spec.n});
      break;
  }
  if (spec.bias) w.bias.assign(static_cast<size_t>(spec.c_hat), T(0));
  return w;
}

template <typename T>
void init_weights(const ConvSpec& spec, ConvWeightsT<T>& w, Rng& rng) {
  for (auto& k : w.kernels) {
    const Shape4 ks = k.shape();
    // Inputs feeding one output: kernel taps times in-channels per group
    // (dim 1 of the kernel), except transposed kernels where dim 0 is the
    // input side and each output sees n*n/stride^2 taps on average; the
    // simple n*n*c bound is used there as well.
    int64_t fan_in = static_cast<int64_t>(ks.h) * ks.w *
                     (spec.kind == ConvKind::transposed ? ks.b : ks.c);
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (int64_t i = 0; i < k.numel(); ++i) {
      k.data()[i] = static_cast<T>(rng.uniform(-bound, bound));
    }
  }
  for (auto& b : w.bias) b = T(0);
}

}  // namespace fddw
