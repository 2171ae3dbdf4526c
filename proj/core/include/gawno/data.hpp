#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gawno/tensor.hpp"

namespace gawno {

/// A T x F multivariate series with named variables and an optional
/// per-timestep 0/1 fault label column.
struct SeriesTable {
  std::vector<std::string> names;
  std::vector<double> values;        // row-major, rows() x cols()
  std::vector<std::uint8_t> labels;  // empty, or one entry per row

  std::int64_t cols() const { return static_cast<std::int64_t>(names.size()); }
  std::int64_t rows() const {
    return names.empty() ? 0 : static_cast<std::int64_t>(values.size()) / cols();
  }
  double at(std::int64_t t, std::int64_t f) const { return values[static_cast<size_t>(t * cols() + f)]; }
  double& at(std::int64_t t, std::int64_t f) { return values[static_cast<size_t>(t * cols() + f)]; }
  bool has_labels() const { return !labels.empty(); }
};

/// Per-variable training statistics backing the two-stage normalization
/// (z-score, then min-max of the z-scored training range onto [-1, 1]).
struct NormStats {
  std::vector<std::string> names;
  std::vector<double> mean;
  std::vector<double> stddev;  // sample standard deviation, must be > 0
  std::vector<double> min;
  std::vector<double> max;

  std::int64_t vars() const { return static_cast<std::int64_t>(mean.size()); }
};

enum class FaultKind { kStep, kRandomVariation, kSlowDrift, kSticking };

std::string fault_kind_name(FaultKind kind);
FaultKind fault_kind_from_name(const std::string& name);

/// Synthetic fault description; magnitude is expressed in units of the
/// target variable's sample standard deviation.
struct FaultSpec {
  FaultKind kind = FaultKind::kStep;
  int variable = 0;
  std::int64_t onset = 160;
  double magnitude = 3.0;
};

/// Windowed view of a series: tensor (B, F, n) plus per-window labels
/// (faulty if any covered timestep is faulty) and window start indices.
struct WindowSet {
  Tensor windows;
  std::vector<std::uint8_t> labels;
  std::vector<std::int64_t> starts;

  std::int64_t count() const { return windows.defined() ? windows.dim(0) : 0; }
};

/// Knobs of the synthetic process generator. Channels mix shared latent
/// sinusoids (exactly periodic with the given period) through positive
/// per-channel gains and small integer shifts, plus AR(1) noise.
struct SynthConfig {
  int latents = 3;
  std::int64_t period = 256;
  double noise_std = 0.15;
  double ar_coeff = 0.6;
};

SeriesTable load_csv(const std::filesystem::path& path);
void save_csv(const SeriesTable& table, const std::filesystem::path& path);

NormStats fit_norm(const SeriesTable& train);
SeriesTable normalize(const SeriesTable& x, const NormStats& stats);
SeriesTable denormalize(const SeriesTable& x, const NormStats& stats);

WindowSet window(const SeriesTable& x, std::int64_t length, std::int64_t stride);

SeriesTable synth_process(int features, std::int64_t steps, std::uint64_t seed,
                          const SynthConfig& cfg = {});

SeriesTable inject_fault(const SeriesTable& x, const FaultSpec& spec, std::uint64_t seed);

}  // namespace gawno
