#include "gawno/networks.hpp"

#include <cmath>

namespace gawno {

namespace {

// Weights draw from N(0, 1/fan_in); biases start at zero.
Tensor init_linear_weight(std::int64_t out_dim, std::int64_t in_dim, Rng& rng) {
  Tensor w(Shape{out_dim, in_dim});
  rng.fill_normal(w.data(), 1.0 / std::sqrt(static_cast<double>(in_dim)));
  return w;
}

Tensor init_kernel(std::int64_t d_v, std::int64_t d_o, std::int64_t band, Rng& rng) {
  Tensor r(Shape{d_v, d_o, band});
  rng.fill_normal(r.data(), 1.0 / std::sqrt(static_cast<double>(d_v)));
  return r;
}

void add_wib_params(ParamStore& store, const std::string& prefix, const WibConfig& cfg,
                    std::int64_t input_length, Rng& rng) {
  const std::int64_t band = cfg.band_length(input_length);
  store.add(prefix + ".kernel_approx", init_kernel(cfg.in_channels, cfg.out_channels, band, rng));
  store.add(prefix + ".kernel_detail", init_kernel(cfg.in_channels, cfg.out_channels, band, rng));
  store.add(prefix + ".conv_weight", init_linear_weight(cfg.out_channels, cfg.in_channels, rng));
  store.add(prefix + ".conv_bias", Tensor(Shape{cfg.out_channels}));
}

WibParams wib_params_at(const ParamStore& store, const std::string& prefix) {
  return WibParams{store.at(prefix + ".kernel_approx"), store.at(prefix + ".kernel_detail"),
                   store.at(prefix + ".conv_weight"), store.at(prefix + ".conv_bias")};
}

void add_body_params(ParamStore& store, const GeneratorSpec& spec, Rng& rng) {
  store.add("lift.weight", init_linear_weight(spec.lifted_width, spec.features, rng));
  store.add("lift.bias", Tensor(Shape{spec.lifted_width}));
  for (int s = 1; s <= 4; ++s) {
    add_wib_params(store, "down" + std::to_string(s), spec.down_config(s),
                   spec.down_input_length(s), rng);
  }
  for (int s = 1; s <= 4; ++s) {
    add_wib_params(store, "up" + std::to_string(s), spec.up_config(s),
                   spec.up_input_length(s), rng);
  }
  const int width = spec.proj_hidden();
  store.add("proj1.weight", init_linear_weight(width, 2 * spec.lifted_width, rng));
  store.add("proj1.bias", Tensor(Shape{width}));
  store.add("proj2.weight", init_linear_weight(width, width, rng));
  store.add("proj2.bias", Tensor(Shape{width}));
  store.add("proj3.weight", init_linear_weight(spec.features, width, rng));
  store.add("proj3.bias", Tensor(Shape{spec.features}));
}

// Lifting, the eight blocks with skips, and the projection. Returns (B,F,n).
Tensor body_forward(const Tensor& x, const GeneratorSpec& spec, const ParamStore& params,
                    bool zero_skips) {
  auto skip = [&](const Tensor& t) -> Tensor {
    if (!zero_skips) return t;
    return Tensor(t.shape());
  };

  Tensor v0 = linear(x, params.at("lift.weight"), params.at("lift.bias"));

  std::array<Tensor, 4> down;
  Tensor cur = v0;
  for (int s = 1; s <= 4; ++s) {
    cur = wib_forward(cur, spec.down_config(s), wib_params_at(params, "down" + std::to_string(s)));
    down[static_cast<size_t>(s - 1)] = cur;
  }

  cur = wib_forward(down[3], spec.up_config(1), wib_params_at(params, "up1"));
  for (int s = 2; s <= 4; ++s) {
    Tensor joined = concat_channels(skip(down[static_cast<size_t>(4 - s)]), cur);
    cur = wib_forward(joined, spec.up_config(s), wib_params_at(params, "up" + std::to_string(s)));
  }
  Tensor h = concat_channels(skip(v0), cur);

  h = gelu(linear(h, params.at("proj1.weight"), params.at("proj1.bias")));
  h = gelu(linear(h, params.at("proj2.weight"), params.at("proj2.bias")));
  return linear(h, params.at("proj3.weight"), params.at("proj3.bias"));
}

}  // namespace

void GeneratorSpec::validate() const {
  if (features < 1) throw ConfigError("generator: features must be >= 1");
  if (lifted_width < 1) throw ConfigError("generator: lifted_width must be >= 1");
  DecompositionConfig dc{levels, keep_from};
  dc.validate();
  WaveletFilter::get(wavelet);
  const std::int64_t block = std::int64_t{1} << (4 + levels);
  if (length <= 0 || length % block != 0) {
    throw ConfigError("generator: length " + std::to_string(length) +
                      " must be a positive multiple of 2^(4+m) = " + std::to_string(block));
  }
}

std::array<int, 4> GeneratorSpec::down_channels() const {
  return {lifted_width, 2 * lifted_width, 4 * lifted_width, 8 * lifted_width};
}

std::array<int, 4> GeneratorSpec::up_channels() const {
  return {4 * lifted_width, 2 * lifted_width, lifted_width, lifted_width};
}

WibConfig GeneratorSpec::down_config(int stage) const {
  const auto out = down_channels();
  WibConfig cfg;
  cfg.in_channels = stage == 1 ? lifted_width : out[static_cast<size_t>(stage - 2)];
  cfg.out_channels = out[static_cast<size_t>(stage - 1)];
  cfg.mode = WibMode::kDownlift;
  cfg.wavelet = wavelet;
  cfg.decomposition = DecompositionConfig{levels, keep_from};
  cfg.activation = Activation::kGelu;
  return cfg;
}

WibConfig GeneratorSpec::up_config(int stage) const {
  const auto down = down_channels();
  const auto up = up_channels();
  WibConfig cfg;
  // up1 consumes the bottleneck directly; later stages consume a skip concat.
  cfg.in_channels = stage == 1 ? down[3]
                               : down[static_cast<size_t>(4 - stage)] +
                                     up[static_cast<size_t>(stage - 2)];
  cfg.out_channels = up[static_cast<size_t>(stage - 1)];
  cfg.mode = WibMode::kUplift;
  cfg.wavelet = wavelet;
  cfg.decomposition = DecompositionConfig{levels, keep_from};
  cfg.activation = Activation::kGelu;
  return cfg;
}

std::int64_t GeneratorSpec::down_input_length(int stage) const {
  return length >> (stage - 1);
}

std::int64_t GeneratorSpec::up_input_length(int stage) const {
  return length >> (5 - stage);
}

void DiscriminatorSpec::validate() const {
  body.validate();
  if (head_hidden < 1) throw ConfigError("discriminator: head_hidden must be >= 1");
}

ParamStore init_generator_params(const GeneratorSpec& spec, Rng& rng) {
  spec.validate();
  ParamStore store;
  add_body_params(store, spec, rng);
  return store;
}

ParamStore init_discriminator_params(const DiscriminatorSpec& spec, Rng& rng) {
  spec.validate();
  ParamStore store;
  add_body_params(store, spec.body, rng);
  store.add("head1.weight", init_linear_weight(spec.head_hidden, 2, rng));
  store.add("head1.bias", Tensor(Shape{spec.head_hidden}));
  store.add("head2.weight", init_linear_weight(spec.head_hidden, spec.head_hidden, rng));
  store.add("head2.bias", Tensor(Shape{spec.head_hidden}));
  store.add("head3.weight", init_linear_weight(1, spec.head_hidden, rng));
  store.add("head3.bias", Tensor(Shape{1}));
  return store;
}

Tensor generator_forward(const Tensor& z, const GeneratorSpec& spec,
                         const ParamStore& params, bool zero_skips) {
  spec.validate();
  if (z.rank() != 3 || z.dim(1) != spec.features || z.dim(2) != spec.length) {
    throw ShapeError("generator_forward: input " + shape_str(z.shape()) +
                     " does not match spec (F=" + std::to_string(spec.features) +
                     ", n=" + std::to_string(spec.length) + ")");
  }
  return body_forward(z, spec, params, zero_skips);
}

DiscriminatorScore discriminator_forward(const Tensor& y, const DiscriminatorSpec& spec,
                                         const ParamStore& params, bool zero_skips) {
  spec.validate();
  const GeneratorSpec& body = spec.body;
  if (y.rank() != 3 || y.dim(1) != body.features || y.dim(2) != body.length) {
    throw ShapeError("discriminator_forward: input " + shape_str(y.shape()) +
                     " does not match spec (F=" + std::to_string(body.features) +
                     ", n=" + std::to_string(body.length) + ")");
  }
  const std::int64_t B = y.dim(0), F = y.dim(1), n = y.dim(2);

  Tensor h = body_forward(y, body, params, zero_skips);

  // Score each (sample, feature) series pointwise over t with input
  // (h[b,f,t], t/n), then take the Riemann mean over t.
  Tensor rows = reshape(h, Shape{B * F, 1, n});
  Tensor coords(Shape{B * F, 1, n});
  {
    auto cv = coords.data();
    for (std::int64_t r = 0; r < B * F; ++r) {
      for (std::int64_t t = 0; t < n; ++t) {
        cv[r * n + t] = static_cast<double>(t) / static_cast<double>(n);
      }
    }
  }
  Tensor head = concat_channels(rows, coords);
  head = gelu(linear(head, params.at("head1.weight"), params.at("head1.bias")));
  head = gelu(linear(head, params.at("head2.weight"), params.at("head2.bias")));
  head = linear(head, params.at("head3.weight"), params.at("head3.bias"));

  DiscriminatorScore score;
  score.r = reshape(mean_last(head), Shape{B, F});
  score.p = reshape(mean_channels(reshape(score.r, Shape{B, F, 1})), Shape{B});
  score.p = sigmoid(score.p);
  return score;
}

}  // namespace gawno
