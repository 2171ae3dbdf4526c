#include <benchmark/benchmark.h>

#include "gawno/fdi.hpp"
#include "gawno/networks.hpp"
#include "gawno/training.hpp"
#include "gawno/wavelet.hpp"
#include "gawno/wib.hpp"

namespace {

using namespace gawno;

Tensor random_tensor(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.normal();
  return t;
}

GeneratorSpec tiny_spec() {
  GeneratorSpec spec;
  spec.features = 5;
  spec.length = 64;
  spec.lifted_width = 8;
  return spec;
}

void BM_DwtRoundTrip(benchmark::State& state) {
  static const char* kNames[] = {"db1", "db3", "db6", "db8"};
  const WaveletFilter& f = WaveletFilter::get(kNames[state.range(0)]);
  Rng rng(1);
  Tensor x = random_tensor(Shape{2, 4, 256}, rng);
  for (auto _ : state) {
    WaveletCoeffs dec = wavedec(x, f, 2);
    Tensor back = waverec(dec, f);
    benchmark::DoNotOptimize(back.at(0));
  }
  state.SetLabel(f.name);
}

void BM_WibForward(benchmark::State& state) {
  WibConfig cfg;
  cfg.in_channels = 8;
  cfg.out_channels = 8;
  Rng rng(2);
  const std::int64_t band = cfg.band_length(128);
  WibParams params{random_tensor(Shape{8, 8, band}, rng), random_tensor(Shape{8, 8, band}, rng),
                   random_tensor(Shape{8, 8}, rng), random_tensor(Shape{8}, rng)};
  Tensor x = random_tensor(Shape{4, 8, 128}, rng);
  for (auto _ : state) {
    Tensor y = wib_forward(x, cfg, params);
    benchmark::DoNotOptimize(y.at(0));
  }
}

void BM_GeneratorForward(benchmark::State& state) {
  GeneratorSpec spec = tiny_spec();
  Rng rng(3);
  ParamStore params = init_generator_params(spec, rng);
  Tensor z = random_tensor(Shape{4, spec.features, spec.length}, rng);
  for (auto _ : state) {
    Tensor out = generator_forward(z, spec, params);
    benchmark::DoNotOptimize(out.at(0));
  }
}

void BM_TrainingStep(benchmark::State& state) {
  GeneratorSpec gen_spec = tiny_spec();
  DiscriminatorSpec disc_spec;
  disc_spec.body = gen_spec;
  Rng rng(4);
  ParamStore gen = init_generator_params(gen_spec, rng);
  ParamStore disc = init_discriminator_params(disc_spec, rng);
  Tensor real = random_tensor(Shape{4, gen_spec.features, gen_spec.length}, rng);
  TrainConfig cfg;
  Rng noise(5);
  for (auto _ : state) {
    double d = discriminator_step(real, gen_spec, disc_spec, cfg, gen, disc, noise);
    double g = generator_step(4, gen_spec, disc_spec, cfg, gen, disc, noise);
    benchmark::DoNotOptimize(d + g);
  }
}

void BM_Reconstruct(benchmark::State& state) {
  GeneratorSpec spec = tiny_spec();
  Rng rng(6);
  ParamStore params = init_generator_params(spec, rng);
  Tensor x = random_tensor(Shape{2, spec.features, spec.length}, rng);
  const int draws = static_cast<int>(state.range(0));
  for (auto _ : state) {
    Tensor best = reconstruct(x, spec, params, draws, /*seed=*/0);
    benchmark::DoNotOptimize(best.at(0));
  }
}

}  // namespace

BENCHMARK(BM_DwtRoundTrip)->Arg(0)->Arg(2)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_WibForward)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GeneratorForward)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_TrainingStep)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Reconstruct)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
