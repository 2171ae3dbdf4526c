#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gawno/networks.hpp"

namespace gawno {

/// Optimization hyperparameters of the adversarial loop. Gradient clipping
/// and label smoothing default to off (0 disables either).
struct TrainConfig {
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

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;            // 1-based
  double d_loss = 0.0;      // batch-mean discriminator loss
  double g_loss = 0.0;      // batch-mean generator loss
  double probe_error = 0.0; // best-of-draws reconstruction MSE on the probe batch
};

struct TrainLog {
  std::vector<EpochRecord> records;
};

struct TrainResult {
  ParamStore generator;
  ParamStore discriminator;
  TrainLog log;
};

/// One discriminator update: draws one noise batch from noise_rng, generates
/// a synthetic batch outside the tape (so the generator stays untouched),
/// and descends L_D = BCE(D(real), 1 - label_smoothing) + BCE(D(fake), 0).
/// Returns the loss value; epoch/batch only label the non-finite-loss abort.
double discriminator_step(const Tensor& real, const GeneratorSpec& gen_spec,
                          const DiscriminatorSpec& disc_spec, const TrainConfig& cfg,
                          const ParamStore& generator, ParamStore& discriminator,
                          Rng& noise_rng, int epoch = 0, std::int64_t batch = 0);

/// One generator update with fresh noise on the non-saturating
/// L_G = BCE(D(G(z)), 1). Discriminator gradients produced as a byproduct of
/// backpropagating through the frozen partner are discarded, not applied.
double generator_step(std::int64_t batch_size, const GeneratorSpec& gen_spec,
                      const DiscriminatorSpec& disc_spec, const TrainConfig& cfg,
                      ParamStore& generator, ParamStore& discriminator, Rng& noise_rng,
                      int epoch = 0, std::int64_t batch = 0);

/// Algorithm: per batch, one discriminator_step, then one generator_step.
/// Initialization and all noise are derived from cfg.seed, so identical
/// inputs reproduce the log bit-for-bit.
TrainResult train(const Tensor& windows, const GeneratorSpec& gen_spec,
                  const DiscriminatorSpec& disc_spec, const TrainConfig& cfg);

/// Loads a checkpoint back into memory; cfg_text is the exact text block
/// stored at save time.
struct Checkpoint {
  std::string config_text;
  ParamStore generator;
  ParamStore discriminator;
};

/// Binary format: magic "GAWN", u16 version, u32 config-text length + bytes,
/// then for each store a u32 tensor count followed by records of
/// (u32 name length, name bytes, u32 rank, u64 dims, little-endian f64 data).
/// The write is atomic (temp file + rename) and the round trip is bit-exact.
void save_checkpoint(const ParamStore& generator, const ParamStore& discriminator,
                     const std::string& config_text, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Verifies that `loaded` provides exactly the names and shapes of
/// `expected`; throws StateError naming the first mismatch.
void check_compatible(const ParamStore& loaded, const ParamStore& expected);

void save_train_log(const TrainLog& log, const std::filesystem::path& path);

}  // namespace gawno
