#pragma once

#include <string>

#include "gawno/ops.hpp"
#include "gawno/tensor.hpp"
#include "gawno/wavelet.hpp"

namespace gawno {

enum class WibMode { kPlain, kDownlift, kUplift };
enum class Activation { kGelu, kNone };

/// Configuration of one wavelet integral block. The mode fixes the output
/// length: plain preserves n, downlift yields n/2^keep_from, uplift yields 2n.
struct WibConfig {
  int in_channels = 1;   // d_v
  int out_channels = 1;  // d_o
  WibMode mode = WibMode::kPlain;
  std::string wavelet = "db6";
  DecompositionConfig decomposition;
  Activation activation = Activation::kGelu;

  void validate() const;

  /// Length of the parameterized coefficient bands for input length n.
  std::int64_t band_length(std::int64_t n) const;
  std::int64_t output_length(std::int64_t n) const;

  /// Smallest power of two the input length must divide by.
  std::int64_t length_multiple() const;
};

/// Trainable tensors of one block: kernel weights for the coarsest
/// approximation and detail bands (each (d_v, d_o, band)), plus the
/// channelwise 1x1 convolution of the residual path.
struct WibParams {
  Tensor kernel_approx;
  Tensor kernel_detail;
  Tensor conv_weight;  // (d_o, d_v)
  Tensor conv_bias;    // (d_o)
};

/// Pointwise kernel application in coefficient space:
/// out[b,o,t] = sum_i r[i,o,t] * wv[b,i,t], for r of shape (d_v, d_o, k).
Tensor kernel_multiply(const Tensor& wv, const Tensor& r);

/// Residual-path resamplers. avg_pairs halves the length axis by averaging
/// adjacent pairs; repeat2 doubles it by duplicating each sample.
Tensor avg_pairs(const Tensor& x);
Tensor repeat2(const Tensor& x);

/// One wavelet integral block: decompose, weight the coarsest bands,
/// reconstruct per mode, add the resampled 1x1-convolution residual, and
/// activate. Finer detail bands pass through unchanged when d_v == d_o and
/// are dropped otherwise.
Tensor wib_forward(const Tensor& v, const WibConfig& cfg, const WibParams& params);

}  // namespace gawno
