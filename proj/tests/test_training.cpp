#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "doctest.h"
#include "gawno/data.hpp"
#include "gawno/rng.hpp"
#include "gawno/training.hpp"
#include "oracles.hpp"

using namespace gawno;
using oracles::max_abs_diff;
namespace fs = std::filesystem;

namespace {

GeneratorSpec tiny_spec(int features = 2) {
  GeneratorSpec spec;
  spec.features = features;
  spec.length = 64;
  spec.lifted_width = 4;
  return spec;
}

DiscriminatorSpec tiny_disc_spec(int features = 2) {
  DiscriminatorSpec spec;
  spec.body = tiny_spec(features);
  spec.head_hidden = 8;
  return spec;
}

Tensor sinusoid_windows(std::int64_t count, std::int64_t F, std::int64_t n, std::uint64_t seed) {
  SynthConfig synth;
  synth.period = 16;
  SeriesTable series = synth_process(static_cast<int>(F), (count - 1) * 16 + n, seed, synth);
  NormStats stats = fit_norm(series);
  WindowSet set = window(normalize(series, stats), n, 16);
  REQUIRE(set.count() == count);
  return set.windows;
}

std::vector<std::vector<double>> snapshot(const ParamStore& store) {
  std::vector<std::vector<double>> out;
  for (const auto& name : store.names()) {
    auto span = store.at(name).data();
    out.emplace_back(span.begin(), span.end());
  }
  return out;
}

bool identical(const ParamStore& store, const std::vector<std::vector<double>>& snap) {
  size_t i = 0;
  for (const auto& name : store.names()) {
    auto span = store.at(name).data();
    if (!std::equal(span.begin(), span.end(), snap[i].begin(), snap[i].end())) return false;
    ++i;
  }
  return true;
}

struct FileGuard {
  fs::path path;
  ~FileGuard() {
    std::error_code ec;
    fs::remove(path, ec);
  }
};

}  // namespace

TEST_SUITE_BEGIN("training");

TEST_CASE("TrainConfig::validate rejects out-of-range settings") {
  TrainConfig good;
  CHECK_NOTHROW(good.validate());
  auto broken = [](auto mutate) {
    TrainConfig cfg;
    mutate(cfg);
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  };
  broken([](TrainConfig& c) { c.epochs = -1; });
  broken([](TrainConfig& c) { c.batch_size = 0; });
  broken([](TrainConfig& c) { c.learning_rate = 0.0; });
  broken([](TrainConfig& c) { c.weight_decay = -1e-3; });
  broken([](TrainConfig& c) { c.beta1 = 1.0; });
  broken([](TrainConfig& c) { c.beta2 = -0.1; });
  broken([](TrainConfig& c) { c.label_smoothing = 0.5; });
  broken([](TrainConfig& c) { c.grad_clip = -1.0; });
}

TEST_CASE("train: zero epochs returns freshly initialized parameters and an empty log") {
  Tensor windows = sinusoid_windows(8, 2, 64, 11);
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.seed = 42;
  TrainResult result = train(windows, tiny_spec(), tiny_disc_spec(), cfg);
  CHECK(result.log.records.empty());

  // The parameters must be exactly the seeded initialization.
  Rng root(42);
  Rng gen_init = root.stream(1);
  Rng disc_init = root.stream(2);
  ParamStore want_gen = init_generator_params(tiny_spec(), gen_init);
  ParamStore want_disc = init_discriminator_params(tiny_disc_spec(), disc_init);
  REQUIRE(result.generator.names() == want_gen.names());
  REQUIRE(result.discriminator.names() == want_disc.names());
  for (const auto& name : want_gen.names()) {
    CHECK(max_abs_diff(result.generator.at(name).data(), want_gen.at(name).data()) == 0.0);
  }
  for (const auto& name : want_disc.names()) {
    CHECK(max_abs_diff(result.discriminator.at(name).data(), want_disc.at(name).data()) == 0.0);
  }
}

TEST_CASE("a zeroed discriminator head pins the losses at 2*log2 and log2") {
  GeneratorSpec gen_spec = tiny_spec();
  DiscriminatorSpec disc_spec = tiny_disc_spec();
  Rng rng(7);
  ParamStore gen = init_generator_params(gen_spec, rng);
  ParamStore disc = init_discriminator_params(disc_spec, rng);
  for (const char* name : {"head1.weight", "head1.bias", "head2.weight", "head2.bias",
                           "head3.weight", "head3.bias"}) {
    for (double& v : disc.at(name).data()) v = 0.0;
  }

  TrainConfig cfg;
  cfg.weight_decay = 0.0;  // keep the zero head an exact fixed point
  Tensor real = sinusoid_windows(4, 2, 64, 12);
  Rng noise(99);

  // With D(x) = 0.5 everywhere the losses are constants; the head receives
  // zero gradient, so they stay constant across steps.
  for (int step = 0; step < 3; ++step) {
    const double d_loss = discriminator_step(real, gen_spec, disc_spec, cfg, gen, disc, noise);
    const double g_loss =
        generator_step(real.dim(0), gen_spec, disc_spec, cfg, gen, disc, noise);
    CHECK(d_loss == doctest::Approx(2.0 * std::numbers::ln2).epsilon(1e-14));
    CHECK(g_loss == doctest::Approx(std::numbers::ln2).epsilon(1e-14));
  }
}

TEST_CASE("partner freeze: each step leaves the other network bit-identical") {
  GeneratorSpec gen_spec = tiny_spec();
  DiscriminatorSpec disc_spec = tiny_disc_spec();
  Rng rng(21);
  ParamStore gen = init_generator_params(gen_spec, rng);
  ParamStore disc = init_discriminator_params(disc_spec, rng);
  Tensor real = sinusoid_windows(4, 2, 64, 13);
  TrainConfig cfg;
  Rng noise(5);

  auto gen_before = snapshot(gen);
  auto disc_before = snapshot(disc);
  discriminator_step(real, gen_spec, disc_spec, cfg, gen, disc, noise);
  CHECK(identical(gen, gen_before));        // generator untouched, bit-for-bit
  CHECK_FALSE(identical(disc, disc_before));  // discriminator actually moved
  CHECK(disc.step_count() == 1);
  CHECK(gen.step_count() == 0);

  auto disc_mid = snapshot(disc);
  generator_step(real.dim(0), gen_spec, disc_spec, cfg, gen, disc, noise);
  CHECK(identical(disc, disc_mid));         // discriminator untouched this time
  CHECK_FALSE(identical(gen, gen_before));  // generator actually moved
  CHECK(gen.step_count() == 1);
  CHECK(disc.step_count() == 1);

  // Byproduct gradients on the frozen partner were discarded.
  for (const auto& name : disc.names()) CHECK_FALSE(disc.at(name).has_grad());
}

TEST_CASE("train: fixed seed reproduces parameters and the log bit-for-bit") {
  Tensor windows = sinusoid_windows(8, 2, 64, 14);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  cfg.seed = 3;
  TrainResult a = train(windows, tiny_spec(), tiny_disc_spec(), cfg);
  TrainResult b = train(windows, tiny_spec(), tiny_disc_spec(), cfg);

  REQUIRE(a.log.records.size() == 2);
  REQUIRE(b.log.records.size() == 2);
  for (size_t i = 0; i < 2; ++i) {
    CHECK(a.log.records[i].epoch == static_cast<int>(i) + 1);
    CHECK(a.log.records[i].d_loss == b.log.records[i].d_loss);
    CHECK(a.log.records[i].g_loss == b.log.records[i].g_loss);
    CHECK(a.log.records[i].probe_error == b.log.records[i].probe_error);
    // BCE losses are nonnegative by construction.
    CHECK(a.log.records[i].d_loss >= 0.0);
    CHECK(a.log.records[i].g_loss >= 0.0);
    CHECK(a.log.records[i].probe_error >= 0.0);
  }
  for (const auto& name : a.generator.names()) {
    CHECK(max_abs_diff(a.generator.at(name).data(), b.generator.at(name).data()) == 0.0);
  }
  for (const auto& name : a.discriminator.names()) {
    CHECK(max_abs_diff(a.discriminator.at(name).data(), b.discriminator.at(name).data()) == 0.0);
  }

  // A different seed leads the run elsewhere.
  TrainConfig other = cfg;
  other.seed = 4;
  TrainResult c = train(windows, tiny_spec(), tiny_disc_spec(), other);
  CHECK(c.log.records[1].d_loss != a.log.records[1].d_loss);
}

TEST_CASE("train: non-finite loss aborts naming the epoch and batch") {
  Tensor windows = sinusoid_windows(4, 2, 64, 15);
  windows.at(7) = std::numeric_limits<double>::quiet_NaN();
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 4;
  try {
    train(windows, tiny_spec(), tiny_disc_spec(), cfg);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("epoch 1") != std::string::npos);
    CHECK(msg.find("batch 0") != std::string::npos);
  }
}

TEST_CASE("train: shape mismatch between windows and spec is rejected") {
  Tensor windows = sinusoid_windows(4, 3, 64, 16);
  CHECK_THROWS_AS(train(windows, tiny_spec(2), tiny_disc_spec(2), TrainConfig{}), ShapeError);
}

TEST_CASE("checkpoint: save/load round trip is bit-exact including config text") {
  GeneratorSpec gen_spec = tiny_spec();
  DiscriminatorSpec disc_spec = tiny_disc_spec();
  Rng rng(31);
  ParamStore gen = init_generator_params(gen_spec, rng);
  ParamStore disc = init_discriminator_params(disc_spec, rng);
  const std::string cfg_text = "[model]\nfeatures = 2\nlength = 64\n";

  FileGuard g{fs::temp_directory_path() / "gawno_test_ckpt.bin"};
  save_checkpoint(gen, disc, cfg_text, g.path);
  Checkpoint ck = load_checkpoint(g.path);
  CHECK(ck.config_text == cfg_text);
  REQUIRE(ck.generator.names() == gen.names());
  REQUIRE(ck.discriminator.names() == disc.names());
  for (const auto& name : gen.names()) {
    CHECK(ck.generator.at(name).shape() == gen.at(name).shape());
    CHECK(max_abs_diff(ck.generator.at(name).data(), gen.at(name).data()) == 0.0);
  }
  for (const auto& name : disc.names()) {
    CHECK(max_abs_diff(ck.discriminator.at(name).data(), disc.at(name).data()) == 0.0);
  }
  CHECK_NOTHROW(check_compatible(ck.generator, gen));
}

TEST_CASE("checkpoint: corruption is reported explicitly") {
  ParamStore a;
  a.add("w", Tensor::from(Shape{2, 2}, {1.0, 2.0, 3.0, 4.0}));
  ParamStore b;
  b.add("v", Tensor::from(Shape{2}, {5.0, 6.0}));
  FileGuard g{fs::temp_directory_path() / "gawno_test_ckpt2.bin"};
  save_checkpoint(a, b, "cfg", g.path);

  auto read_bytes = [&] {
    std::ifstream in(g.path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  auto write_bytes = [&](const std::string& bytes) {
    std::ofstream out(g.path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  };
  const std::string original = read_bytes();

  write_bytes(original.substr(0, original.size() / 2));
  CHECK_THROWS_AS(load_checkpoint(g.path), DataError);

  std::string bad_magic = original;
  bad_magic[0] = 'X';
  write_bytes(bad_magic);
  CHECK_THROWS_AS(load_checkpoint(g.path), DataError);

  std::string bad_version = original;
  bad_version[4] = '\x7f';
  write_bytes(bad_version);
  CHECK_THROWS_AS(load_checkpoint(g.path), DataError);

  write_bytes(original + "x");
  CHECK_THROWS_AS(load_checkpoint(g.path), DataError);

  write_bytes(original);
  CHECK_NOTHROW(load_checkpoint(g.path));
}

TEST_CASE("check_compatible: names and shapes must match exactly") {
  ParamStore expected;
  expected.add("layer.weight", Tensor(Shape{3, 2}));
  expected.add("layer.bias", Tensor(Shape{3}));

  ParamStore ok;
  ok.add("layer.weight", Tensor(Shape{3, 2}));
  ok.add("layer.bias", Tensor(Shape{3}));
  CHECK_NOTHROW(check_compatible(ok, expected));

  ParamStore missing;
  missing.add("layer.weight", Tensor(Shape{3, 2}));
  try {
    check_compatible(missing, expected);
    FAIL("expected StateError");
  } catch (const StateError& e) {
    CHECK(std::string(e.what()).find("layer.bias") != std::string::npos);
  }

  ParamStore wrong_shape;
  wrong_shape.add("layer.weight", Tensor(Shape{2, 3}));
  wrong_shape.add("layer.bias", Tensor(Shape{3}));
  try {
    check_compatible(wrong_shape, expected);
    FAIL("expected StateError");
  } catch (const StateError& e) {
    CHECK(std::string(e.what()).find("layer.weight") != std::string::npos);
  }

  ParamStore extra = ok;
  extra.add("stray", Tensor(Shape{1}));
  CHECK_THROWS_AS(check_compatible(extra, expected), StateError);
}

TEST_CASE("save_train_log: CSV schema and full-precision round trip") {
  TrainLog log;
  log.records.push_back(EpochRecord{1, 1.375, 0.6931471805599453, 0.25});
  log.records.push_back(EpochRecord{2, 1.25, 0.5, 0.125});
  FileGuard g{fs::temp_directory_path() / "gawno_test_log.csv"};
  save_train_log(log, g.path);

  std::ifstream in(g.path);
  std::string line;
  REQUIRE(static_cast<bool>(std::getline(in, line)));
  CHECK(line == "epoch,d_loss,g_loss,probe_error");
  REQUIRE(static_cast<bool>(std::getline(in, line)));
  CHECK(line.find("1,") == 0);
  // 17 significant digits: the printed g_loss parses back to the same bits.
  CHECK(line.find("0.69314718055994529") != std::string::npos);
  const size_t c1 = line.find(','), c2 = line.find(',', c1 + 1);
  const size_t c3 = line.find(',', c2 + 1);
  CHECK(std::stod(line.substr(c2 + 1, c3 - c2 - 1)) == 0.6931471805599453);
  REQUIRE(static_cast<bool>(std::getline(in, line)));
  CHECK(line.find("2,") == 0);
  CHECK_FALSE(std::getline(in, line));
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("training_long");

TEST_CASE("200 epochs on a 5-variable plant: the probe error converges below 0.35") {
  SynthConfig synth;
  synth.period = 16;
  synth.noise_std = 0.10;
  SeriesTable series = synth_process(5, 2000, 0, synth);
  NormStats stats = fit_norm(series);
  WindowSet set = window(normalize(series, stats), 64, 16);

  GeneratorSpec gen = tiny_spec(5);
  gen.lifted_width = 8;
  DiscriminatorSpec disc = tiny_disc_spec(5);
  disc.body = gen;

  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.batch_size = 4;
  cfg.learning_rate = 5e-4;
  cfg.beta1 = 0.5;
  cfg.label_smoothing = 0.1;
  cfg.grad_clip = 1.0;
  cfg.seed = 0;

  TrainResult result = train(set.windows, gen, disc, cfg);
  REQUIRE(result.log.records.size() == 200);
  for (size_t i = 0; i < result.log.records.size(); ++i) {
    CHECK(result.log.records[i].epoch == static_cast<int>(i) + 1);
    CHECK(std::isfinite(result.log.records[i].d_loss));
    CHECK(std::isfinite(result.log.records[i].g_loss));
  }
  // The adversarial probe wanders epoch to epoch, so the convergence check is
  // an absolute bar rather than monotonicity: runs that learn the plant hold
  // the probe well below 0.35 over the back half, diverged runs sit above it.
  const double last = result.log.records.back().probe_error;
  CHECK(last < 0.35);
  double back_half_min = last;
  for (size_t i = 100; i < result.log.records.size(); ++i)
    back_half_min = std::min(back_half_min, result.log.records[i].probe_error);
  CHECK(back_half_min < 0.30);
}

TEST_SUITE_END();
