#pragma once

#include <optional>
#include <span>

#include "lnskd/tensor.hpp"

// Differentiable operators used by the LNet family. Each takes an optional
// tape; when a tape is given and any input requires a gradient, the
// operation is recorded and its output is marked requires_grad.
//
// All convolutions are cross-correlations (no kernel flip).
namespace lnskd::ops {

/// Pooling behaviour on odd spatial sizes.
enum class PoolRemainder {
  kStrict,  // odd height/width is an error
  kFloor,   // trailing row/column is dropped
};

/// input [C,H,W], kernels [C,K,K], bias [C] -> [C, H+2p-K+1, W+2p-K+1].
template <typename T>
BasicTensor<T> conv2d_depthwise(BasicTape<T>* tape, const BasicTensor<T>& input,
                                const BasicTensor<T>& kernels,
                                const std::optional<BasicTensor<T>>& bias, std::size_t padding);

/// input [Ci,H,W], kernels [Co,Ci], bias [Co] -> [Co,H,W].
template <typename T>
BasicTensor<T> conv2d_pointwise(BasicTape<T>* tape, const BasicTensor<T>& input,
                                const BasicTensor<T>& kernels,
                                const std::optional<BasicTensor<T>>& bias);

/// input [Ci,H,W], kernels [Co,Ci,K,K], bias [Co] -> [Co, H', W'].
template <typename T>
BasicTensor<T> conv2d_standard(BasicTape<T>* tape, const BasicTensor<T>& input,
                               const BasicTensor<T>& kernels,
                               const std::optional<BasicTensor<T>>& bias, std::size_t padding);

/// Max-Feature-Map: out[i] = max(in[i], in[i + C/2]). Ties route the
/// gradient to channel i.
template <typename T>
BasicTensor<T> mfm_max(BasicTape<T>* tape, const BasicTensor<T>& input);

/// 2x2 / stride-2 max pooling. Ties route the gradient to the first
/// element of the window in row-major order.
template <typename T>
BasicTensor<T> maxpool2x2(BasicTape<T>* tape, const BasicTensor<T>& input,
                          PoolRemainder remainder = PoolRemainder::kStrict);

/// input [D], weight [M,D], bias [M] -> [M].
template <typename T>
BasicTensor<T> linear(BasicTape<T>* tape, const BasicTensor<T>& input, const BasicTensor<T>& weight,
                      const std::optional<BasicTensor<T>>& bias);

/// Same data under a new shape with equal element count.
template <typename T>
BasicTensor<T> reshape(BasicTape<T>* tape, const BasicTensor<T>& input, Shape shape);

template <typename T>
BasicTensor<T> add(BasicTape<T>* tape, const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
BasicTensor<T> mul(BasicTape<T>* tape, const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
BasicTensor<T> scale(BasicTape<T>* tape, const BasicTensor<T>& a, T factor);

/// Sum of all elements -> shape [1].
template <typename T>
BasicTensor<T> sum(BasicTape<T>* tape, const BasicTensor<T>& a);

/// Arithmetic mean of a non-empty list of scalar tensors -> shape [1].
template <typename T>
BasicTensor<T> mean_of(BasicTape<T>* tape, std::span<const BasicTensor<T>> scalars);

}  // namespace lnskd::ops
