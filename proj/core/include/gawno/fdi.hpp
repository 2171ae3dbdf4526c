#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "gawno/data.hpp"
#include "gawno/networks.hpp"

namespace gawno {

/// Per-variable Gaussian model of normal-operation reconstruction errors.
/// The global threshold is the variable-mean of mu + k*sigma.
struct ThresholdModel {
  std::vector<double> mean;    // mu_s
  std::vector<double> stddev;  // sigma_s
  double sigma_k = 3.0;
  double global_threshold = 0.0;

  double variable_threshold(std::int64_t v) const {
    return mean[static_cast<size_t>(v)] + sigma_k * stddev[static_cast<size_t>(v)];
  }
};

/// Detection outcome over one series. All stored series are the smoothed
/// ones the thresholds were applied to, so flag[t] == (score[t] > threshold)
/// holds exactly.
struct FaultReport {
  std::vector<double> score;                         // mean over variables
  std::vector<std::uint8_t> flag;
  std::vector<std::vector<double>> residual;         // [variable][t]
  std::vector<std::vector<std::uint8_t>> var_flag;   // [variable][t]
  std::optional<std::int64_t> onset;
  double threshold = 0.0;

  std::int64_t steps() const { return static_cast<std::int64_t>(score.size()); }
  std::int64_t vars() const { return static_cast<std::int64_t>(residual.size()); }
  double flagged_fraction() const;
};

struct ConfusionCounts {
  std::int64_t tp = 0, fp = 0, fn = 0, tn = 0;
};

/// Precision/recall/F1 with zero denominators mapped to 0; degenerate is
/// set when any denominator underflowed (the warning record).
struct MetricsResult {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool degenerate = false;
};

/// Search and smoothing knobs of the detection pipeline.
struct DetectConfig {
  std::int64_t window = 64;
  std::int64_t stride = 32;
  int noise_draws = 64;
  double sigma_k = 3.0;
  int smooth_window = 5;
  std::uint64_t seed = 0;
};

/// Best-of-N reconstruction: draws a fixed-seed set of noise_draws latent
/// batches, generates candidates once, and picks per sample the candidate
/// with the smallest squared error. Deterministic given the seed.
Tensor reconstruct(const Tensor& x, const GeneratorSpec& spec, const ParamStore& gen,
                   int noise_draws, std::uint64_t seed);

/// Per-variable squared reconstruction residuals of a full series:
/// windows the series (adding a tail window when the stride does not tile
/// it), reconstructs each window, and averages the squared residual of all
/// windows covering each timestep. Returns [variable][t], unsmoothed.
std::vector<std::vector<double>> reconstruction_errors(const SeriesTable& normalized,
                                                       const GeneratorSpec& spec,
                                                       const ParamStore& gen,
                                                       const DetectConfig& cfg);

/// Centered moving average with a truncated window at the edges.
std::vector<double> smooth_ma(const std::vector<double>& series, int window);

/// Gaussian fit per variable over (already smoothed) normal-operation error
/// series; needs at least 2 samples per variable.
ThresholdModel fit_threshold(const std::vector<std::vector<double>>& normal_errors, double k);

/// Smooths the per-variable errors of the series, thresholds the
/// variable-mean score, and locates the onset (first flagged step).
FaultReport detect(const SeriesTable& normalized, const ThresholdModel& model,
                   const GeneratorSpec& spec, const ParamStore& gen, const DetectConfig& cfg);

/// Variables ranked by peak standardized residual over the flagged region,
/// descending; ties broken by variable index; empty when nothing is flagged.
std::vector<int> isolate(const FaultReport& report, const ThresholdModel& model);

MetricsResult metrics(const ConfusionCounts& counts);

/// Mann-Whitney AUC: fraction of (positive, negative) pairs with the
/// positive scored higher, ties counting one half. Needs both classes.
double auc_roc(std::span<const double> scores, std::span<const std::uint8_t> labels);

void save_fault_report(const FaultReport& report, const std::vector<std::string>& names,
                       const std::filesystem::path& path);
FaultReport load_fault_report(const std::filesystem::path& path);

}  // namespace gawno
