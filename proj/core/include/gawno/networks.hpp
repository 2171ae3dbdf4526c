#pragma once

#include <array>
#include <string>

#include "gawno/param_store.hpp"
#include "gawno/rng.hpp"
#include "gawno/wib.hpp"

namespace gawno {

/// Architecture of the U-Net-shaped wavelet neural operator: lifting to
/// lifted_width channels, four downlifting blocks with doubling channels,
/// four uplifting blocks with skip concatenations, and a two-hidden-layer
/// projection back to feature space.
struct GeneratorSpec {
  int features = 5;            // F
  std::int64_t length = 64;    // n
  int lifted_width = 32;       // C0
  std::string wavelet = "db6";
  int levels = 2;              // m
  int keep_from = 1;           // h
  int projection_hidden = 0;   // 0 means 2 * lifted_width

  void validate() const;

  int proj_hidden() const { return projection_hidden > 0 ? projection_hidden : 2 * lifted_width; }

  /// Output channels of the four downlifting blocks: C0 * {1,2,4,8}.
  std::array<int, 4> down_channels() const;
  /// Output channels of the four uplifting blocks: C0 * {4,2,1,1}.
  std::array<int, 4> up_channels() const;

  WibConfig down_config(int stage) const;  // stage in 1..4
  WibConfig up_config(int stage) const;    // stage in 1..4

  /// Input length of the given block (stage 1..4 on either path).
  std::int64_t down_input_length(int stage) const;
  std::int64_t up_input_length(int stage) const;
};

/// Discriminator = the same U-Net body plus a pointwise scoring head that
/// maps (value, t/n) pairs through three fully connected layers.
struct DiscriminatorSpec {
  GeneratorSpec body;
  int head_hidden = 32;

  void validate() const;
};

struct DiscriminatorScore {
  Tensor r;  // (B, F): per-feature Riemann means of the head output
  Tensor p;  // (B): sigmoid of the feature-mean of r, strictly in (0,1)
};

ParamStore init_generator_params(const GeneratorSpec& spec, Rng& rng);
ParamStore init_discriminator_params(const DiscriminatorSpec& spec, Rng& rng);

/// z (B,F,n) -> synthetic sample (B,F,n). zero_skips replaces every skip
/// tensor with zeros (diagnostic hook for the non-degeneracy test).
Tensor generator_forward(const Tensor& z, const GeneratorSpec& spec,
                         const ParamStore& params, bool zero_skips = false);

DiscriminatorScore discriminator_forward(const Tensor& y, const DiscriminatorSpec& spec,
                                         const ParamStore& params, bool zero_skips = false);

}  // namespace gawno
