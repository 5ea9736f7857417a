#pragma once

#include <functional>

#include "lnskd/tensor.hpp"

namespace lnskd {

/// A scalar-valued function of tensors. It must record onto the tape when
/// one is supplied and must be deterministic.
using ScalarFunction = std::function<TensorD(TapeD* tape, const TensorD& x)>;

/// Compares the tape gradient of f at x with central differences, one
/// coordinate at a time, and returns
///   max_i |analytic_i - numeric_i| / max(|analytic_i|, |numeric_i|, 1e-8).
///
/// x is perturbed in place and restored; f may read x through any alias
/// (e.g. a model parameter). Results at non-differentiable points (max
/// ties, kinks) are meaningless. Throws NumericError on non-finite values.
double finite_difference_check(const ScalarFunction& f, TensorD x, double epsilon);

}  // namespace lnskd
