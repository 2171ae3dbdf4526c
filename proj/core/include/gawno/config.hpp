#pragma once

#include <filesystem>
#include <string>

#include "gawno/data.hpp"
#include "gawno/fdi.hpp"
#include "gawno/networks.hpp"
#include "gawno/training.hpp"

namespace gawno {

/// Declarative run description parsed from flat sectioned key=value text.
/// Unknown sections or keys are rejected; serialize() emits a canonical form
/// that parses back to an equal structure. The [normalization] section is
/// populated only inside checkpoints so detection runs are self-contained.
struct RunConfig {
  struct Model {
    int features = 5;
    std::int64_t length = 64;
    int lifted_width = 8;
    std::string wavelet = "db6";
    int levels = 2;
    int keep_from = 1;
    int projection_hidden = 0;  // 0: use 2 * lifted_width
    int head_hidden = 32;
  } model;

  struct Train {
    int epochs = 200;
    int batch_size = 16;
    double learning_rate = 1e-3;
    double weight_decay = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double grad_clip = 0.0;
    double label_smoothing = 0.0;
    std::uint64_t seed = 0;
  } train;

  struct Data {
    std::string train_path;
    std::string validation_path;
    std::string test_path;
    std::int64_t stride = 32;
  } data;

  struct Detect {
    int noise_draws = 64;
    double sigma_k = 3.0;
    int smooth_window = 5;
  } detect;

  struct Fault {
    bool inject = true;
    std::string kind = "step";
    int variable = 3;
    std::int64_t onset = 160;
    double magnitude = 3.0;
  } fault;

  struct Synth {
    int variables = 5;
    std::int64_t steps = 480;
    int latents = 3;
    std::int64_t period = 256;
    double noise_std = 0.15;
    double ar_coeff = 0.6;
  } synth;

  struct Paths {
    std::string checkpoint = "gawno.ckpt";
    std::string report = "report.csv";
    std::string log = "train_log.csv";
    std::string out = "synth.csv";
  } paths;

  NormStats normalization;  // empty unless loaded from a checkpoint

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  std::string serialize() const;

  GeneratorSpec generator_spec() const;
  DiscriminatorSpec discriminator_spec() const;
  TrainConfig train_config() const;
  DetectConfig detect_config() const;
  FaultSpec fault_spec() const;
  SynthConfig synth_config() const;
};

}  // namespace gawno
