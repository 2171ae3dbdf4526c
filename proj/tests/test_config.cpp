#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "gawno/config.hpp"
#include "gawno/errors.hpp"

using namespace gawno;

TEST_SUITE_BEGIN("config");

TEST_CASE("defaults: an empty document yields the documented defaults") {
  RunConfig cfg = RunConfig::parse("");
  CHECK(cfg.model.features == 5);
  CHECK(cfg.model.length == 64);
  CHECK(cfg.model.wavelet == "db6");
  CHECK(cfg.model.levels == 2);
  CHECK(cfg.model.keep_from == 1);
  CHECK(cfg.train.epochs == 200);
  CHECK(cfg.train.learning_rate == 1e-3);
  CHECK(cfg.train.seed == 0);
  CHECK(cfg.data.stride == 32);
  CHECK(cfg.detect.noise_draws == 64);
  CHECK(cfg.detect.sigma_k == 3.0);
  CHECK(cfg.detect.smooth_window == 5);
  CHECK(cfg.fault.inject);
  CHECK(cfg.fault.kind == "step");
  CHECK(cfg.fault.onset == 160);
  CHECK(cfg.synth.variables == 5);
  CHECK(cfg.synth.steps == 480);
  CHECK(cfg.paths.checkpoint == "gawno.ckpt");
  CHECK(cfg.normalization.vars() == 0);
}

TEST_CASE("parse: sections, comments, whitespace, and typed values") {
  const std::string text =
      "# leading comment\n"
      "[model]\n"
      "features = 7\n"
      "  length=128  \n"
      "wavelet = db3\n"
      "; another comment style\n"
      "\n"
      "[train]\n"
      "epochs = 17\n"
      "learning_rate = 5e-4\n"
      "label_smoothing = 0.1\n"
      "seed = 42\n"
      "[data]\n"
      "train = /tmp/a.csv\n"
      "stride = 16\n"
      "[fault]\n"
      "inject = false\n"
      "kind = slow_drift\n"
      "magnitude = 2.5\n";
  RunConfig cfg = RunConfig::parse(text);
  CHECK(cfg.model.features == 7);
  CHECK(cfg.model.length == 128);
  CHECK(cfg.model.wavelet == "db3");
  CHECK(cfg.train.epochs == 17);
  CHECK(cfg.train.learning_rate == 5e-4);
  CHECK(cfg.train.label_smoothing == 0.1);
  CHECK(cfg.train.seed == 42);
  CHECK(cfg.data.train_path == "/tmp/a.csv");
  CHECK(cfg.data.stride == 16);
  CHECK_FALSE(cfg.fault.inject);
  CHECK(cfg.fault.kind == "slow_drift");
  CHECK(cfg.fault.magnitude == 2.5);
  // Untouched sections keep defaults.
  CHECK(cfg.synth.steps == 480);
}

TEST_CASE("round trip: parse, serialize, parse again is stable") {
  RunConfig cfg;
  cfg.model.features = 3;
  cfg.model.length = 256;
  cfg.model.wavelet = "db8";
  cfg.train.learning_rate = 2.5e-4;
  cfg.train.seed = 987654321;
  cfg.data.train_path = "train.csv";
  cfg.fault.inject = false;
  cfg.synth.noise_std = 0.013;
  cfg.normalization.names = {"a", "b", "c"};
  cfg.normalization.mean = {0.1, -2.0, 3.5};
  cfg.normalization.stddev = {1.0, 2.0, 0.5};
  cfg.normalization.min = {-1.0, -4.0, 2.0};
  cfg.normalization.max = {1.5, 0.0, 5.0};

  const std::string first = cfg.serialize();
  RunConfig back = RunConfig::parse(first);
  CHECK(back.serialize() == first);
  CHECK(back.model.features == 3);
  CHECK(back.model.wavelet == "db8");
  CHECK(back.train.learning_rate == 2.5e-4);  // %.17g survives exactly
  CHECK(back.train.seed == 987654321);
  CHECK(back.normalization.names == cfg.normalization.names);
  CHECK(back.normalization.mean == cfg.normalization.mean);
  CHECK(back.normalization.max == cfg.normalization.max);
}

TEST_CASE("rejections: unknown sections, unknown keys, malformed lines") {
  CHECK_THROWS_AS(RunConfig::parse("[plotting]\n"), ConfigError);

  try {
    RunConfig::parse("[model]\nfeaturess = 5\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("featuress") != std::string::npos);
    CHECK(msg.find("model") != std::string::npos);
  }

  try {
    RunConfig::parse("[model]\nfeatures 5\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);  // line number
  }

  CHECK_THROWS_AS(RunConfig::parse("features = 5\n"), ConfigError);  // key outside section
  CHECK_THROWS_AS(RunConfig::parse("[model\nfeatures = 5\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("[train]\nlearning_rate = fast\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("[train]\nepochs = 2.5\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("[fault]\ninject = maybe\n"), ConfigError);
  CHECK_THROWS_AS(RunConfig::parse("[normalization]\nmean = 1,2\nstddev = 1\nmin = 0,0\nmax = 1,1\nnames = a,b\n"),
                  ConfigError);
}

TEST_CASE("load: missing file raises a config error naming the path") {
  try {
    RunConfig::load("/nonexistent/gawno.ini");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/gawno.ini") != std::string::npos);
  }

  const auto path = std::filesystem::temp_directory_path() / "gawno_test_cfg.ini";
  {
    std::ofstream out(path, std::ios::trunc);
    out << "[model]\nfeatures = 9\n";
  }
  RunConfig cfg = RunConfig::load(path);
  CHECK(cfg.model.features == 9);
  std::filesystem::remove(path);
}

TEST_CASE("derived structs: config fields land in the right spec slots") {
  RunConfig cfg;
  cfg.model.features = 4;
  cfg.model.length = 128;
  cfg.model.lifted_width = 6;
  cfg.model.wavelet = "db1";
  cfg.model.levels = 3;
  cfg.model.keep_from = 2;
  cfg.model.projection_hidden = 11;
  cfg.model.head_hidden = 9;
  cfg.train.epochs = 5;
  cfg.train.batch_size = 3;
  cfg.train.label_smoothing = 0.05;
  cfg.train.seed = 7;
  cfg.data.stride = 8;
  cfg.detect.noise_draws = 12;
  cfg.detect.sigma_k = 2.0;
  cfg.detect.smooth_window = 3;
  cfg.fault.kind = "sticking";
  cfg.fault.variable = 2;
  cfg.fault.onset = 99;
  cfg.fault.magnitude = 1.5;
  cfg.synth.latents = 4;
  cfg.synth.period = 64;

  GeneratorSpec gen = cfg.generator_spec();
  CHECK(gen.features == 4);
  CHECK(gen.length == 128);
  CHECK(gen.lifted_width == 6);
  CHECK(gen.wavelet == "db1");
  CHECK(gen.levels == 3);
  CHECK(gen.keep_from == 2);
  CHECK(gen.projection_hidden == 11);

  DiscriminatorSpec disc = cfg.discriminator_spec();
  CHECK(disc.body.features == 4);
  CHECK(disc.head_hidden == 9);

  TrainConfig tc = cfg.train_config();
  CHECK(tc.epochs == 5);
  CHECK(tc.batch_size == 3);
  CHECK(tc.label_smoothing == 0.05);
  CHECK(tc.seed == 7);

  DetectConfig dc = cfg.detect_config();
  CHECK(dc.window == 128);
  CHECK(dc.stride == 8);
  CHECK(dc.noise_draws == 12);
  CHECK(dc.sigma_k == 2.0);
  CHECK(dc.smooth_window == 3);
  CHECK(dc.seed == 7);

  FaultSpec fs = cfg.fault_spec();
  CHECK(fs.kind == FaultKind::kSticking);
  CHECK(fs.variable == 2);
  CHECK(fs.onset == 99);
  CHECK(fs.magnitude == 1.5);

  SynthConfig sc = cfg.synth_config();
  CHECK(sc.latents == 4);
  CHECK(sc.period == 64);
}

TEST_SUITE_END();
