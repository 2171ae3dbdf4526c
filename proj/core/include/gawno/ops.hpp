#pragma once

#include "gawno/tensor.hpp"

namespace gawno {

/// Channelwise affine map (a 1x1 convolution over the length axis):
/// out[i,c,t] = sum_f w[c,f] * x[i,f,t] + b[c], for x of shape (B,F,n),
/// w of shape (C,F), b of shape (C). Differentiable in all three arguments.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);

/// Elementwise x * Phi(x) with Phi the standard normal CDF (exact erf form).
Tensor gelu(const Tensor& x);

/// Elementwise logistic function; outputs lie strictly in (0,1).
Tensor sigmoid(const Tensor& x);

/// Mean binary cross-entropy of predictions p against constant 0/1 targets.
/// Predictions are clamped to [1e-7, 1-1e-7] in both the logs and the
/// gradient denominators. Returns a scalar (shape {1}).
Tensor bce_loss(const Tensor& p, const Tensor& target);

/// Mean binary cross-entropy of sigmoid(logits) against targets, fused for
/// numerical stability: the value is softplus(x) - t*x and the gradient
/// sigmoid(x) - t, so neither saturates however confident the logits get.
Tensor bce_logits_loss(const Tensor& logits, const Tensor& target);

/// Stack b's channels after a's: (B,C1,n) + (B,C2,n) -> (B,C1+C2,n).
Tensor concat_channels(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& x, double c);

/// Sum of all entries, as a scalar tensor.
Tensor sum_all(const Tensor& x);

/// Mean over the length axis: (B,C,n) -> (B,C,1).
Tensor mean_last(const Tensor& x);

/// Mean over the channel axis: (B,C,n) -> (B,1,n).
Tensor mean_channels(const Tensor& x);

/// Same data, new shape; element count must match.
Tensor reshape(const Tensor& x, Shape shape);

}  // namespace gawno
