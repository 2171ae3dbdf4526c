#include "gawno/training.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "gawno/ops.hpp"
#include "gawno/rng.hpp"

namespace gawno {

namespace {

Tensor gather_batch(const Tensor& windows, const std::vector<std::int64_t>& order,
                    std::int64_t begin, std::int64_t end) {
  const std::int64_t F = windows.dim(1), n = windows.dim(2), b = end - begin;
  Tensor batch(Shape{b, F, n});
  const double* src = windows.data().data();
  double* dst = batch.data().data();
  const std::int64_t sample = F * n;
  for (std::int64_t i = 0; i < b; ++i) {
    const std::int64_t k = order[static_cast<size_t>(begin + i)];
    std::copy(src + k * sample, src + (k + 1) * sample, dst + i * sample);
  }
  return batch;
}

Tensor draw_noise(Rng& rng, std::int64_t b, std::int64_t f, std::int64_t n) {
  Tensor z(Shape{b, f, n});
  rng.fill_normal(z.data());
  return z;
}

// L2-norm clip over the whole store, applied in place to the gradients.
void clip_gradients(ParamStore& store, double max_norm) {
  double sq = 0.0;
  for (const auto& name : store.names()) {
    const Tensor t = store.at(name);
    if (!t.has_grad()) continue;
    for (double g : t.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm <= max_norm || norm == 0.0) return;
  const double scale = max_norm / norm;
  for (const auto& name : store.names()) {
    Tensor t = store.at(name);
    if (!t.has_grad()) continue;
    for (double& g : t.grad_buffer()) g *= scale;
  }
}

double require_finite_loss(const Tensor& loss, const char* which, int epoch, std::int64_t batch) {
  const double v = loss.item();
  if (!std::isfinite(v)) {
    throw NumericError(std::string("non-finite ") + which + " loss at epoch " +
                       std::to_string(epoch) + ", batch " + std::to_string(batch));
  }
  return v;
}

// Pre-sigmoid per-sample logit, mean over features of r; feeding this to the
// fused BCE keeps gradients alive when the discriminator saturates (the
// sigmoid-then-log composition underflows once |logit| passes ~16).
Tensor score_logit(const DiscriminatorScore& score) {
  const std::int64_t B = score.r.dim(0), F = score.r.dim(1);
  return reshape(mean_channels(reshape(score.r, Shape{B, F, 1})), Shape{B});
}

// Mean squared error of the best candidate per probe sample; mirrors the
// detection-time reconstruction but with a fixed tiny draw set.
double probe_reconstruction_error(const Tensor& probe, const Tensor& probe_noise,
                                  const GeneratorSpec& spec, const ParamStore& gen) {
  Tensor candidates = generator_forward(probe_noise, spec, gen);
  const std::int64_t B = probe.dim(0), N = candidates.dim(0);
  const std::int64_t sample = probe.dim(1) * probe.dim(2);
  const double* xp = probe.data().data();
  const double* cp = candidates.data().data();
  double total = 0.0;
  for (std::int64_t b = 0; b < B; ++b) {
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t i = 0; i < N; ++i) {
      double err = 0.0;
      for (std::int64_t j = 0; j < sample; ++j) {
        const double d = cp[i * sample + j] - xp[b * sample + j];
        err += d * d;
      }
      best = std::min(best, err);
    }
    total += best / static_cast<double>(sample);
  }
  return total / static_cast<double>(B);
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (learning_rate <= 0.0) throw ConfigError("train: learning_rate must be > 0");
  if (weight_decay < 0.0) throw ConfigError("train: weight_decay must be >= 0");
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0) {
    throw ConfigError("train: betas must lie in [0, 1)");
  }
  if (label_smoothing < 0.0 || label_smoothing >= 0.5) {
    throw ConfigError("train: label_smoothing must lie in [0, 0.5)");
  }
  if (grad_clip < 0.0) throw ConfigError("train: grad_clip must be >= 0");
}

double discriminator_step(const Tensor& real, const GeneratorSpec& gen_spec,
                          const DiscriminatorSpec& disc_spec, const TrainConfig& cfg,
                          const ParamStore& generator, ParamStore& discriminator,
                          Rng& noise_rng, int epoch, std::int64_t batch) {
  const std::int64_t b = real.dim(0), F = real.dim(1), n = real.dim(2);
  // One-sided smoothing: only the real targets are softened, fake targets
  // keep their exact labels.
  Tensor smoothed_ones = Tensor::full(Shape{b}, 1.0 - cfg.label_smoothing);
  Tensor zeros = Tensor::full(Shape{b}, 0.0);

  // The synthetic batch is generated outside the tape so no gradient reaches
  // the generator.
  Tensor fake = generator_forward(draw_noise(noise_rng, b, F, n), gen_spec, generator);
  double value = 0.0;
  {
    Graph graph;
    DiscriminatorScore on_real = discriminator_forward(real, disc_spec, discriminator);
    DiscriminatorScore on_fake = discriminator_forward(fake, disc_spec, discriminator);
    Tensor loss = add(bce_logits_loss(score_logit(on_real), smoothed_ones),
                      bce_logits_loss(score_logit(on_fake), zeros));
    value = require_finite_loss(loss, "discriminator", epoch, batch);
    graph.backward(loss);
  }
  if (cfg.grad_clip > 0.0) clip_gradients(discriminator, cfg.grad_clip);
  adam_step(discriminator, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps,
            cfg.weight_decay);
  return value;
}

double generator_step(std::int64_t batch_size, const GeneratorSpec& gen_spec,
                      const DiscriminatorSpec& disc_spec, const TrainConfig& cfg,
                      ParamStore& generator, ParamStore& discriminator, Rng& noise_rng,
                      int epoch, std::int64_t batch) {
  const std::int64_t F = gen_spec.features, n = gen_spec.length;
  Tensor ones = Tensor::full(Shape{batch_size}, 1.0);
  double value = 0.0;
  {
    Graph graph;
    Tensor synth = generator_forward(draw_noise(noise_rng, batch_size, F, n), gen_spec, generator);
    DiscriminatorScore on_synth = discriminator_forward(synth, disc_spec, discriminator);
    Tensor loss = bce_logits_loss(score_logit(on_synth), ones);
    value = require_finite_loss(loss, "generator", epoch, batch);
    graph.backward(loss);
  }
  if (cfg.grad_clip > 0.0) clip_gradients(generator, cfg.grad_clip);
  adam_step(generator, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps, cfg.weight_decay);
  // Gradients that reached the frozen partner are discarded, not applied.
  discriminator.zero_grads();
  return value;
}

TrainResult train(const Tensor& windows, const GeneratorSpec& gen_spec,
                  const DiscriminatorSpec& disc_spec, const TrainConfig& cfg) {
  cfg.validate();
  gen_spec.validate();
  disc_spec.validate();
  if (windows.rank() != 3 || windows.dim(1) != gen_spec.features ||
      windows.dim(2) != gen_spec.length) {
    throw ShapeError("train: windows " + shape_str(windows.shape()) +
                     " do not match spec (F=" + std::to_string(gen_spec.features) +
                     ", n=" + std::to_string(gen_spec.length) + ")");
  }

  Rng root(cfg.seed);
  Rng gen_init = root.stream(1);
  Rng disc_init = root.stream(2);
  Rng shuffle_rng = root.stream(3);
  Rng noise_rng = root.stream(4);
  Rng probe_rng = root.stream(5);

  TrainResult result;
  result.generator = init_generator_params(gen_spec, gen_init);
  result.discriminator = init_discriminator_params(disc_spec, disc_init);

  const std::int64_t B = windows.dim(0), F = windows.dim(1), n = windows.dim(2);
  const std::int64_t batch = std::min<std::int64_t>(cfg.batch_size, B);

  // Fixed probe batch and noise, reused every epoch so the logged error is
  // comparable across epochs.
  std::vector<std::int64_t> identity(static_cast<size_t>(B));
  std::iota(identity.begin(), identity.end(), std::int64_t{0});
  Tensor probe = gather_batch(windows, identity, 0, batch);
  Tensor probe_noise = draw_noise(probe_rng, batch, F, n);

  std::vector<std::int64_t> order = identity;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (size_t i = order.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(shuffle_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(order[i - 1], order[j]);
    }

    double d_sum = 0.0, g_sum = 0.0;
    std::int64_t batches = 0;
    for (std::int64_t begin = 0; begin < B; begin += batch) {
      const std::int64_t end = std::min(B, begin + batch);
      Tensor real = gather_batch(windows, order, begin, end);
      d_sum += discriminator_step(real, gen_spec, disc_spec, cfg, result.generator,
                                  result.discriminator, noise_rng, epoch, batches);
      g_sum += generator_step(end - begin, gen_spec, disc_spec, cfg, result.generator,
                              result.discriminator, noise_rng, epoch, batches);
      ++batches;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.d_loss = d_sum / static_cast<double>(batches);
    record.g_loss = g_sum / static_cast<double>(batches);
    record.probe_error = probe_reconstruction_error(probe, probe_noise, gen_spec, result.generator);
    result.log.records.push_back(record);
  }
  return result;
}

}  // namespace gawno
