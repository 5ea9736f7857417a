#include "lnskd/ops.hpp"

#include <string>
#include <utility>
#include <vector>

namespace lnskd {

std::string shape_to_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

namespace ops {
namespace {

template <typename T>
bool any_requires_grad(const BasicTensor<T>& t) {
  return t.requires_grad();
}
template <typename T, typename... Rest>
bool any_requires_grad(const BasicTensor<T>& t, const Rest&... rest) {
  return t.requires_grad() || any_requires_grad(rest...);
}
template <typename T>
bool opt_requires_grad(const std::optional<BasicTensor<T>>& t) {
  return t && t->requires_grad();
}

void expect(bool ok, const std::string& message) {
  if (!ok) throw ShapeError(message);
}

template <typename T>
void expect_rank(const BasicTensor<T>& t, std::size_t rank, const char* what) {
  expect(t.defined() && t.rank() == rank, std::string(what) + " must have rank " + std::to_string(rank) +
                                              (t.defined() ? ", got shape " + shape_to_string(t.shape()) : ""));
}

template <typename T>
void check_bias(const std::optional<BasicTensor<T>>& bias, std::size_t channels, const char* op) {
  if (!bias) return;
  expect(bias->rank() == 1 && bias->dim(0) == channels,
         std::string(op) + ": bias shape " + shape_to_string(bias->shape()) + " does not match " +
             std::to_string(channels) + " output channels");
}

std::size_t conv_out_size(std::size_t in, std::size_t k, std::size_t padding, const char* op,
                          const char* axis) {
  expect(in + 2 * padding >= k, std::string(op) + ": kernel " + std::to_string(k) + " larger than padded " +
                                    axis + " " + std::to_string(in + 2 * padding));
  return in + 2 * padding - k + 1;
}

}  // namespace

template <typename T>
BasicTensor<T> conv2d_depthwise(BasicTape<T>* tape, const BasicTensor<T>& input,
                                const BasicTensor<T>& kernels,
                                const std::optional<BasicTensor<T>>& bias, std::size_t padding) {
  expect_rank(input, 3, "conv2d_depthwise input");
  expect_rank(kernels, 3, "conv2d_depthwise kernels");
  const std::size_t C = input.dim(0), H = input.dim(1), W = input.dim(2);
  const std::size_t K = kernels.dim(1);
  expect(kernels.dim(0) == C, "conv2d_depthwise: kernel channels (dim 0) = " + std::to_string(kernels.dim(0)) +
                                  " but input channels = " + std::to_string(C));
  expect(kernels.dim(2) == K, "conv2d_depthwise: kernels must be square, got " + shape_to_string(kernels.shape()));
  expect(K % 2 == 1, "conv2d_depthwise: kernel size must be odd, got " + std::to_string(K));
  check_bias(bias, C, "conv2d_depthwise");
  const std::size_t Ho = conv_out_size(H, K, padding, "conv2d_depthwise", "height");
  const std::size_t Wo = conv_out_size(W, K, padding, "conv2d_depthwise", "width");

  BasicTensor<T> out(Shape{C, Ho, Wo});
  const auto in = input.data();
  const auto ker = kernels.data();
  auto o = out.data();
  const auto p = static_cast<std::ptrdiff_t>(padding);
  for (std::size_t c = 0; c < C; ++c) {
    const T b = bias ? (*bias)[c] : T(0);
    for (std::size_t oy = 0; oy < Ho; ++oy) {
      for (std::size_t ox = 0; ox < Wo; ++ox) {
        T acc = b;
        for (std::size_t ky = 0; ky < K; ++ky) {
          const auto iy = static_cast<std::ptrdiff_t>(oy + ky) - p;
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
          for (std::size_t kx = 0; kx < K; ++kx) {
            const auto ix = static_cast<std::ptrdiff_t>(ox + kx) - p;
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
            acc += ker[(c * K + ky) * K + kx] * in[(c * H + iy) * W + ix];
          }
        }
        o[(c * Ho + oy) * Wo + ox] = acc;
      }
    }
  }

  if (tape && (any_requires_grad(input, kernels) || opt_requires_grad(bias))) {
    out.set_requires_grad(true);
    tape->record(out, [=, input = input, kernels = kernels, bias = bias]() mutable {
      const auto g = std::as_const(out).grad();
      const auto xin = std::as_const(input).data();
      const auto kv = std::as_const(kernels).data();
      std::span<T> gin, gk, gb;
      if (input.requires_grad()) gin = input.ensure_grad();
      if (kernels.requires_grad()) gk = kernels.ensure_grad();
      if (bias && bias->requires_grad()) gb = bias->ensure_grad();
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t oy = 0; oy < Ho; ++oy) {
          for (std::size_t ox = 0; ox < Wo; ++ox) {
            const T go = g[(c * Ho + oy) * Wo + ox];
            if (!gb.empty()) gb[c] += go;
            for (std::size_t ky = 0; ky < K; ++ky) {
              const auto iy = static_cast<std::ptrdiff_t>(oy + ky) - p;
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
              for (std::size_t kx = 0; kx < K; ++kx) {
                const auto ix = static_cast<std::ptrdiff_t>(ox + kx) - p;
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
                const std::size_t ii = (c * H + iy) * W + ix;
                const std::size_t ki = (c * K + ky) * K + kx;
                if (!gin.empty()) gin[ii] += go * kv[ki];
                if (!gk.empty()) gk[ki] += go * xin[ii];
              }
            }
          }
        }
      }
    });
  }
  return out;
}

template <typename T>
BasicTensor<T> conv2d_pointwise(BasicTape<T>* tape, const BasicTensor<T>& input,
                                const BasicTensor<T>& kernels,
                                const std::optional<BasicTensor<T>>& bias) {
  expect_rank(input, 3, "conv2d_pointwise input");
  expect_rank(kernels, 2, "conv2d_pointwise kernels");
  const std::size_t Ci = input.dim(0), H = input.dim(1), W = input.dim(2);
  const std::size_t Co = kernels.dim(0);
  expect(kernels.dim(1) == Ci, "conv2d_pointwise: kernel input channels (dim 1) = " +
                                   std::to_string(kernels.dim(1)) + " but input channels = " + std::to_string(Ci));
  check_bias(bias, Co, "conv2d_pointwise");
  const std::size_t HW = H * W;

  BasicTensor<T> out(Shape{Co, H, W});
  const auto in = input.data();
  const auto ker = kernels.data();
  auto o = out.data();
  for (std::size_t j = 0; j < Co; ++j) {
    T* row = o.data() + j * HW;
    const T b = bias ? (*bias)[j] : T(0);
    for (std::size_t s = 0; s < HW; ++s) row[s] = b;
    for (std::size_t i = 0; i < Ci; ++i) {
      const T w = ker[j * Ci + i];
      const T* src = in.data() + i * HW;
      for (std::size_t s = 0; s < HW; ++s) row[s] += w * src[s];
    }
  }

  if (tape && (any_requires_grad(input, kernels) || opt_requires_grad(bias))) {
    out.set_requires_grad(true);
    tape->record(out, [=, input = input, kernels = kernels, bias = bias]() mutable {
      const auto g = std::as_const(out).grad();
      const auto xin = std::as_const(input).data();
      const auto kv = std::as_const(kernels).data();
      std::span<T> gin, gk, gb;
      if (input.requires_grad()) gin = input.ensure_grad();
      if (kernels.requires_grad()) gk = kernels.ensure_grad();
      if (bias && bias->requires_grad()) gb = bias->ensure_grad();
      for (std::size_t j = 0; j < Co; ++j) {
        const T* go = g.data() + j * HW;
        if (!gb.empty()) {
          T acc = 0;
          for (std::size_t s = 0; s < HW; ++s) acc += go[s];
          gb[j] += acc;
        }
        for (std::size_t i = 0; i < Ci; ++i) {
          const T* src = xin.data() + i * HW;
          if (!gk.empty()) {
            T acc = 0;
            for (std::size_t s = 0; s < HW; ++s) acc += go[s] * src[s];
            gk[j * Ci + i] += acc;
          }
          if (!gin.empty()) {
            const T w = kv[j * Ci + i];
            T* dst = gin.data() + i * HW;
            for (std::size_t s = 0; s < HW; ++s) dst[s] += w * go[s];
          }
        }
      }
    });
  }
  return out;
}

template <typename T>
BasicTensor<T> conv2d_standard(BasicTape<T>* tape, const BasicTensor<T>& input,
                               const BasicTensor<T>& kernels,
                               const std::optional<BasicTensor<T>>& bias, std::size_t padding) {
  expect_rank(input, 3, "conv2d_standard input");
  expect_rank(kernels, 4, "conv2d_standard kernels");
  const std::size_t Ci = input.dim(0), H = input.dim(1), W = input.dim(2);
  const std::size_t Co = kernels.dim(0), K = kernels.dim(2);
  expect(kernels.dim(1) == Ci, "conv2d_standard: kernel input channels (dim 1) = " +
                                   std::to_string(kernels.dim(1)) + " but input channels = " + std::to_string(Ci));
  expect(kernels.dim(3) == K, "conv2d_standard: kernels must be square, got " + shape_to_string(kernels.shape()));
  expect(K % 2 == 1, "conv2d_standard: kernel size must be odd, got " + std::to_string(K));
  check_bias(bias, Co, "conv2d_standard");
  const std::size_t Ho = conv_out_size(H, K, padding, "conv2d_standard", "height");
  const std::size_t Wo = conv_out_size(W, K, padding, "conv2d_standard", "width");

  BasicTensor<T> out(Shape{Co, Ho, Wo});
  const auto in = input.data();
  const auto ker = kernels.data();
  auto o = out.data();
  const auto p = static_cast<std::ptrdiff_t>(padding);
  for (std::size_t co = 0; co < Co; ++co) {
    const T b = bias ? (*bias)[co] : T(0);
    for (std::size_t oy = 0; oy < Ho; ++oy) {
      for (std::size_t ox = 0; ox < Wo; ++ox) {
        T acc = b;
        for (std::size_t ci = 0; ci < Ci; ++ci) {
          for (std::size_t ky = 0; ky < K; ++ky) {
            const auto iy = static_cast<std::ptrdiff_t>(oy + ky) - p;
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
            for (std::size_t kx = 0; kx < K; ++kx) {
              const auto ix = static_cast<std::ptrdiff_t>(ox + kx) - p;
              if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
              acc += ker[((co * Ci + ci) * K + ky) * K + kx] * in[(ci * H + iy) * W + ix];
            }
          }
        }
        o[(co * Ho + oy) * Wo + ox] = acc;
      }
    }
  }

  if (tape && (any_requires_grad(input, kernels) || opt_requires_grad(bias))) {
    out.set_requires_grad(true);
    tape->record(out, [=, input = input, kernels = kernels, bias = bias]() mutable {
      const auto g = std::as_const(out).grad();
      const auto xin = std::as_const(input).data();
      const auto kv = std::as_const(kernels).data();
      std::span<T> gin, gk, gb;
      if (input.requires_grad()) gin = input.ensure_grad();
      if (kernels.requires_grad()) gk = kernels.ensure_grad();
      if (bias && bias->requires_grad()) gb = bias->ensure_grad();
      for (std::size_t co = 0; co < Co; ++co) {
        for (std::size_t oy = 0; oy < Ho; ++oy) {
          for (std::size_t ox = 0; ox < Wo; ++ox) {
            const T go = g[(co * Ho + oy) * Wo + ox];
            if (!gb.empty()) gb[co] += go;
            for (std::size_t ci = 0; ci < Ci; ++ci) {
              for (std::size_t ky = 0; ky < K; ++ky) {
                const auto iy = static_cast<std::ptrdiff_t>(oy + ky) - p;
                if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(H)) continue;
                for (std::size_t kx = 0; kx < K; ++kx) {
                  const auto ix = static_cast<std::ptrdiff_t>(ox + kx) - p;
                  if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(W)) continue;
                  const std::size_t ii = (ci * H + iy) * W + ix;
                  const std::size_t ki = ((co * Ci + ci) * K + ky) * K + kx;
                  if (!gin.empty()) gin[ii] += go * kv[ki];
                  if (!gk.empty()) gk[ki] += go * xin[ii];
                }
              }
            }
          }
        }
      }
    });
  }
  return out;
}

template <typename T>
BasicTensor<T> mfm_max(BasicTape<T>* tape, const BasicTensor<T>& input) {
  expect_rank(input, 3, "mfm_max input");
  const std::size_t C = input.dim(0), H = input.dim(1), W = input.dim(2);
  expect(C % 2 == 0, "mfm_max: channel count (dim 0) must be even, got " + std::to_string(C));
  const std::size_t half = C / 2 * H * W;
  BasicTensor<T> out(Shape{C / 2, H, W});
  const auto in = input.data();
  auto o = out.data();
  for (std::size_t i = 0; i < half; ++i) o[i] = in[i] >= in[i + half] ? in[i] : in[i + half];

  if (tape && input.requires_grad()) {
    out.set_requires_grad(true);
    tape->record(out, [=, input = input]() mutable {
      const auto g = std::as_const(out).grad();
      const auto xin = std::as_const(input).data();
      auto gin = input.ensure_grad();
      for (std::size_t i = 0; i < half; ++i) {
        if (xin[i] >= xin[i + half]) {
          gin[i] += g[i];
        } else {
          gin[i + half] += g[i];
        }
      }
    });
  }
  return out;
}

template <typename T>
BasicTensor<T> maxpool2x2(BasicTape<T>* tape, const BasicTensor<T>& input, PoolRemainder remainder) {
  expect_rank(input, 3, "maxpool2x2 input");
  const std::size_t C = input.dim(0), H = input.dim(1), W = input.dim(2);
  if (remainder == PoolRemainder::kStrict) {
    expect(H % 2 == 0, "maxpool2x2: height (dim 1) must be even, got " + std::to_string(H));
    expect(W % 2 == 0, "maxpool2x2: width (dim 2) must be even, got " + std::to_string(W));
  }
  expect(H >= 2 && W >= 2, "maxpool2x2: spatial size " + shape_to_string(input.shape()) + " smaller than 2x2");
  const std::size_t Ho = H / 2, Wo = W / 2;
  BasicTensor<T> out(Shape{C, Ho, Wo});
  std::vector<std::size_t> argmax(C * Ho * Wo);
  const auto in = input.data();
  auto o = out.data();
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t oy = 0; oy < Ho; ++oy) {
      for (std::size_t ox = 0; ox < Wo; ++ox) {
        std::size_t best = (c * H + 2 * oy) * W + 2 * ox;
        const std::size_t window[3] = {best + 1, best + W, best + W + 1};
        for (std::size_t idx : window) {
          if (in[idx] > in[best]) best = idx;
        }
        const std::size_t oi = (c * Ho + oy) * Wo + ox;
        o[oi] = in[best];
        argmax[oi] = best;
      }
    }
  }

  if (tape && input.requires_grad()) {
    out.set_requires_grad(true);
    tape->record(out, [=, input = input, argmax = std::move(argmax)]() mutable {
      const auto g = std::as_const(out).grad();
      auto gin = input.ensure_grad();
      for (std::size_t i = 0; i < argmax.size(); ++i) gin[argmax[i]] += g[i];
    });
  }
  return out;
}

template <typename T>
BasicTensor<T> linear(BasicTape<T>* tape, const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const std::optional<BasicTensor<T>>& bias) {
  expect_rank(input, 1, "linear input");
  expect_rank(weight, 2, "linear weight");
  const std::size_t D = input.dim(0), M = weight.dim(0);
  expect(weight.dim(1) == D, "linear: weight input dimension (dim 1) = " + std::to_string(weight.dim(1)) +
                                 " but input length = " + std::to_string(D));
  check_bias(bias, M, "linear");
  BasicTensor<T> out(Shape{M});
  const auto x = input.data();
  const auto w = weight.data();
  auto o = out.data();
  for (std::size_t m = 0; m < M; ++m) {
    T acc = bias ? (*bias)[m] : T(0);
    const T* row = w.data() + m * D;
    for (std::size_t d = 0; d < D; ++d) acc += row[d] * x[d];
    o[m] = acc;
  }

  if (tape && (any_requires_grad(input, weight) || opt_requires_grad(bias))) {
    out.set_requires_grad(true);
    tape->record(out, [=, input = input, weight = weight, bias = bias]() mutable {
      const auto g = std::as_const(out).grad();
      const auto xv = std::as_const(input).data();
      const auto wv = std::as_const(weight).data();
      std::span<T> gin, gw, gb;
      if (input.requires_grad()) gin = input.ensure_grad();
      if (weight.requires_grad()) gw = weight.ensure_grad();
      if (bias && bias->requires_grad()) gb = bias->ensure_grad();
      for (std::size_t m = 0; m < M; ++m) {
        const T go = g[m];
        if (!gb.empty()) gb[m] += go;
        for (std::size_t d = 0; d < D; ++d) {
          if (!gw.empty()) gw[m * D + d] += go * xv[d];
          if (!gin.empty()) gin[d] += go * wv[m * D + d];
        }
      }
    });
  }
  return out;
}

template <typename T>
BasicTensor<T> reshape(BasicTape<T>* tape, const BasicTensor<T>& input, Shape shape) {
  expect(shape_numel(shape) == input.numel(), "reshape: cannot view " + shape_to_string(input.shape()) + " as " +
                                                  shape_to_string(shape));
  BasicTensor<T> out(std::move(shape), std::vector<T>(input.data().begin(), input.data().end()));
  if (tape && input.requires_grad()) {
    out.set_requires_grad(true);
    tape->record(out, [=, input = input]() mutable {
      const auto g = std::as_const(out).grad();
      auto gin = input.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gin[i] += g[i];
    });
  }
  return out;
}

template <typename T>
BasicTensor<T> add(BasicTape<T>* tape, const BasicTensor<T>& a, const BasicTensor<T>& b) {
  expect(a.shape() == b.shape(), "add: shapes " + shape_to_string(a.shape()) + " and " +
                                     shape_to_string(b.shape()) + " differ");
  BasicTensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] + b[i];
  if (tape && any_requires_grad(a, b)) {
    out.set_requires_grad(true);
    tape->record(out, [=, a = a, b = b]() mutable {
      const auto g = std::as_const(out).grad();
      if (a.requires_grad()) {
        auto ga = a.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto gb = b.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    });
  }
  return out;
}

template <typename T>
BasicTensor<T> mul(BasicTape<T>* tape, const BasicTensor<T>& a, const BasicTensor<T>& b) {
  expect(a.shape() == b.shape(), "mul: shapes " + shape_to_string(a.shape()) + " and " +
                                     shape_to_string(b.shape()) + " differ");
  BasicTensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] * b[i];
  if (tape && any_requires_grad(a, b)) {
    out.set_requires_grad(true);
    tape->record(out, [=, a = a, b = b]() mutable {
      const auto g = std::as_const(out).grad();
      const auto av = std::as_const(a).data();
      const auto bv = std::as_const(b).data();
      // a and b may alias (x*x); accumulate through separate passes.
      if (a.requires_grad()) {
        auto ga = a.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
      }
      if (b.requires_grad()) {
        auto gb = b.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
      }
    });
  }
  return out;
}

template <typename T>
BasicTensor<T> scale(BasicTape<T>* tape, const BasicTensor<T>& a, T factor) {
  BasicTensor<T> out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i) out[i] = a[i] * factor;
  if (tape && a.requires_grad()) {
    out.set_requires_grad(true);
    tape->record(out, [=, a = a]() mutable {
      const auto g = std::as_const(out).grad();
      auto ga = a.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * factor;
    });
  }
  return out;
}

template <typename T>
BasicTensor<T> sum(BasicTape<T>* tape, const BasicTensor<T>& a) {
  T acc = 0;
  for (T v : a.data()) acc += v;
  auto out = BasicTensor<T>::scalar(acc);
  if (tape && a.requires_grad()) {
    out.set_requires_grad(true);
    tape->record(out, [=, a = a]() mutable {
      const T g = std::as_const(out).grad()[0];
      auto ga = a.ensure_grad();
      for (auto& v : ga) v += g;
    });
  }
  return out;
}

template <typename T>
BasicTensor<T> mean_of(BasicTape<T>* tape, std::span<const BasicTensor<T>> scalars) {
  expect(!scalars.empty(), "mean_of: empty list");
  T acc = 0;
  bool track = false;
  for (const auto& s : scalars) {
    expect(s.numel() == 1, "mean_of: element of shape " + shape_to_string(s.shape()) + " is not a scalar");
    acc += s[0];
    track = track || s.requires_grad();
  }
  const T inv = T(1) / static_cast<T>(scalars.size());
  auto out = BasicTensor<T>::scalar(acc * inv);
  if (tape && track) {
    out.set_requires_grad(true);
    std::vector<BasicTensor<T>> inputs(scalars.begin(), scalars.end());
    tape->record(out, [=]() mutable {
      const T g = std::as_const(out).grad()[0] * inv;
      for (auto& s : inputs) {
        if (s.requires_grad()) s.ensure_grad()[0] += g;
      }
    });
  }
  return out;
}

#define LNSKD_INSTANTIATE_OPS(T)                                                                          \
  template BasicTensor<T> conv2d_depthwise(BasicTape<T>*, const BasicTensor<T>&, const BasicTensor<T>&,   \
                                           const std::optional<BasicTensor<T>>&, std::size_t);            \
  template BasicTensor<T> conv2d_pointwise(BasicTape<T>*, const BasicTensor<T>&, const BasicTensor<T>&,   \
                                           const std::optional<BasicTensor<T>>&);                         \
  template BasicTensor<T> conv2d_standard(BasicTape<T>*, const BasicTensor<T>&, const BasicTensor<T>&,    \
                                          const std::optional<BasicTensor<T>>&, std::size_t);             \
  template BasicTensor<T> mfm_max(BasicTape<T>*, const BasicTensor<T>&);                                  \
  template BasicTensor<T> maxpool2x2(BasicTape<T>*, const BasicTensor<T>&, PoolRemainder);                \
  template BasicTensor<T> linear(BasicTape<T>*, const BasicTensor<T>&, const BasicTensor<T>&,             \
                                 const std::optional<BasicTensor<T>>&);                                   \
  template BasicTensor<T> reshape(BasicTape<T>*, const BasicTensor<T>&, Shape);                           \
  template BasicTensor<T> add(BasicTape<T>*, const BasicTensor<T>&, const BasicTensor<T>&);               \
  template BasicTensor<T> mul(BasicTape<T>*, const BasicTensor<T>&, const BasicTensor<T>&);               \
  template BasicTensor<T> scale(BasicTape<T>*, const BasicTensor<T>&, T);                                 \
  template BasicTensor<T> sum(BasicTape<T>*, const BasicTensor<T>&);                                      \
  template BasicTensor<T> mean_of(BasicTape<T>*, std::span<const BasicTensor<T>>);

LNSKD_INSTANTIATE_OPS(float)
LNSKD_INSTANTIATE_OPS(double)

}  // namespace ops
}  // namespace lnskd
