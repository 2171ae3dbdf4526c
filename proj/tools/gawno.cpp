#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "gawno/config.hpp"
#include "gawno/errors.hpp"
#include "gawno/fdi.hpp"
#include "gawno/training.hpp"

namespace {

using namespace gawno;

struct Common {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool has_out = false;
  bool has_seed = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "run configuration file");
  cmd->add_option("--seed", c.seed, "override the configured seed");
  cmd->add_option("--out", c.out, "override the command's output path");
}

RunConfig make_config(CLI::App* cmd, Common& c) {
  RunConfig cfg;
  if (cmd->count("--config") > 0) cfg = RunConfig::load(c.config);
  c.has_seed = cmd->count("--seed") > 0;
  c.has_out = cmd->count("--out") > 0;
  if (c.has_seed) cfg.train.seed = c.seed;
  return cfg;
}

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void require_path(const std::string& path, const char* what) {
  if (path.empty())
    throw ConfigError(std::string("no ") + what + " path configured; set it in the [data] section");
}

int cmd_train(const RunConfig& cfg_in, const Common& c) {
  RunConfig cfg = cfg_in;
  GeneratorSpec gen_spec = cfg.generator_spec();
  gen_spec.validate();
  DiscriminatorSpec disc_spec = cfg.discriminator_spec();
  disc_spec.validate();
  TrainConfig tcfg = cfg.train_config();
  tcfg.validate();

  require_path(cfg.data.train_path, "training data");
  SeriesTable raw = load_csv(cfg.data.train_path);
  NormStats stats = fit_norm(raw);
  SeriesTable norm = normalize(raw, stats);
  WindowSet set = window(norm, cfg.model.length, cfg.data.stride);

  TrainResult result = train(set.windows, gen_spec, disc_spec, tcfg);

  cfg.normalization = stats;
  const std::string checkpoint_path = c.has_out ? c.out : cfg.paths.checkpoint;
  save_checkpoint(result.generator, result.discriminator, cfg.serialize(), checkpoint_path);
  save_train_log(result.log, cfg.paths.log);

  std::printf("trained %d epochs on %" PRId64 " windows\n", tcfg.epochs, set.count());
  if (!result.log.records.empty()) {
    const EpochRecord& last = result.log.records.back();
    std::printf("final epoch: d_loss %.6f  g_loss %.6f  probe_error %.6f\n", last.d_loss,
                last.g_loss, last.probe_error);
  }
  std::printf("wrote checkpoint: %s\n", checkpoint_path.c_str());
  std::printf("wrote train log: %s\n", cfg.paths.log.c_str());
  return 0;
}

struct DetectionRun {
  FaultReport report;
  ThresholdModel model;
  SeriesTable test;
};

DetectionRun run_detection(const RunConfig& cfg) {
  Checkpoint ck = load_checkpoint(cfg.paths.checkpoint);
  RunConfig ck_cfg = RunConfig::parse(ck.config_text);
  GeneratorSpec spec = ck_cfg.generator_spec();
  spec.validate();
  {
    Rng probe(0);
    check_compatible(ck.generator, init_generator_params(spec, probe));
  }
  if (ck_cfg.normalization.vars() == 0)
    throw StateError("checkpoint '" + cfg.paths.checkpoint +
                     "' carries no normalization statistics");

  DetectConfig dcfg = cfg.detect_config();
  dcfg.window = spec.length;
  if (dcfg.stride > dcfg.window)
    throw ConfigError("detect: stride " + std::to_string(dcfg.stride) +
                      " exceeds the window length " + std::to_string(dcfg.window));

  require_path(cfg.data.validation_path, "validation (normal split)");
  require_path(cfg.data.test_path, "test data");
  SeriesTable val = normalize(load_csv(cfg.data.validation_path), ck_cfg.normalization);
  std::vector<std::vector<double>> normal_err =
      reconstruction_errors(val, spec, ck.generator, dcfg);
  for (auto& series : normal_err) series = smooth_ma(series, dcfg.smooth_window);
  ThresholdModel model = fit_threshold(normal_err, dcfg.sigma_k);

  SeriesTable test = load_csv(cfg.data.test_path);
  SeriesTable test_norm = normalize(test, ck_cfg.normalization);
  FaultReport report = detect(test_norm, model, spec, ck.generator, dcfg);
  return DetectionRun{std::move(report), std::move(model), std::move(test)};
}

void print_onset(const FaultReport& report) {
  if (report.onset)
    std::printf("onset: %" PRId64 "\n", *report.onset);
  else
    std::printf("onset: none\n");
  std::printf("flagged fraction: %s\n", g17(report.flagged_fraction()).c_str());
}

int cmd_detect(const RunConfig& cfg, const Common& c) {
  DetectionRun run = run_detection(cfg);
  const std::string report_path = c.has_out ? c.out : cfg.paths.report;
  save_fault_report(run.report, run.test.names, report_path);
  print_onset(run.report);
  std::printf("wrote report: %s\n", report_path.c_str());
  return 0;
}

int cmd_isolate(const RunConfig& cfg, const Common& c) {
  DetectionRun run = run_detection(cfg);
  const std::string report_path = c.has_out ? c.out : cfg.paths.report;
  save_fault_report(run.report, run.test.names, report_path);
  print_onset(run.report);

  std::vector<int> ranking = isolate(run.report, run.model);
  if (ranking.empty()) {
    std::printf("ranking: none\n");
  } else {
    std::string line = "ranking:";
    for (int v : ranking) line += " " + run.test.names[static_cast<size_t>(v)];
    std::printf("%s\n", line.c_str());
    std::printf("isolated variable: %s\n",
                run.test.names[static_cast<size_t>(ranking.front())].c_str());
  }
  std::printf("wrote report: %s\n", report_path.c_str());
  return 0;
}

int cmd_evaluate(const RunConfig& cfg, const Common& c) {
  FaultReport report = load_fault_report(cfg.paths.report);
  require_path(cfg.data.test_path, "test data");
  SeriesTable test = load_csv(cfg.data.test_path);
  if (!test.has_labels())
    throw DataError("evaluate: '" + cfg.data.test_path + "' has no label column");
  if (test.rows() != report.steps())
    throw DataError("evaluate: report covers " + std::to_string(report.steps()) +
                    " steps but '" + cfg.data.test_path + "' has " +
                    std::to_string(test.rows()) + " rows");

  ConfusionCounts counts;
  for (std::int64_t t = 0; t < report.steps(); ++t) {
    const bool truth = test.labels[static_cast<size_t>(t)] != 0;
    const bool pred = report.flag[static_cast<size_t>(t)] != 0;
    if (truth && pred) ++counts.tp;
    else if (!truth && pred) ++counts.fp;
    else if (truth && !pred) ++counts.fn;
    else ++counts.tn;
  }
  MetricsResult m = metrics(counts);
  double auc = auc_roc(report.score, test.labels);

  std::string line = "METRICS precision=" + g17(m.precision) + " recall=" + g17(m.recall) +
                     " f1=" + g17(m.f1) + " auc=" + g17(auc) + " fp=" + std::to_string(counts.fp) +
                     " fn=" + std::to_string(counts.fn);
  std::printf("%s\n", line.c_str());
  std::printf("\n  %-10s %s\n", "metric", "value");
  std::printf("  %-10s %.4f\n", "precision", m.precision);
  std::printf("  %-10s %.4f\n", "recall", m.recall);
  std::printf("  %-10s %.4f\n", "f1", m.f1);
  std::printf("  %-10s %.4f\n", "auc", auc);
  std::printf("  %-10s %" PRId64 "\n", "fp", counts.fp);
  std::printf("  %-10s %" PRId64 "\n", "fn", counts.fn);
  if (m.degenerate) std::fprintf(stderr, "warning: zero-denominator metric reported as 0\n");

  if (c.has_out) {
    std::ofstream out(c.out, std::ios::trunc);
    if (!out) throw DataError("cannot write '" + c.out + "'");
    out << line << "\n";
  }
  return 0;
}

int cmd_synth(const RunConfig& cfg, const Common& c) {
  SeriesTable table =
      synth_process(cfg.synth.variables, cfg.synth.steps, cfg.train.seed, cfg.synth_config());
  std::string fault_desc = "none";
  std::string onset_desc = "-";
  if (cfg.fault.inject) {
    FaultSpec spec = cfg.fault_spec();
    table = inject_fault(table, spec, cfg.train.seed);
    fault_desc = fault_kind_name(spec.kind);
    onset_desc = std::to_string(spec.onset);
  } else {
    table.labels.assign(static_cast<size_t>(table.rows()), 0);
  }
  const std::string out_path = c.has_out ? c.out : cfg.paths.out;
  save_csv(table, out_path);
  std::printf("wrote %s: T=%" PRId64 " F=%" PRId64 " fault=%s onset=%s\n", out_path.c_str(),
              table.rows(), table.cols(), fault_desc.c_str(), onset_desc.c_str());
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"wavelet-operator GAN for unsupervised fault detection and isolation"};
  app.require_subcommand(1);

  Common train_c, detect_c, isolate_c, evaluate_c, synth_c;
  int epochs_override = 0;

  CLI::App* train_cmd = app.add_subcommand("train", "train the networks and write a checkpoint");
  add_common(train_cmd, train_c);
  train_cmd->add_option("--epochs", epochs_override, "override the configured epoch count");

  CLI::App* detect_cmd =
      app.add_subcommand("detect", "score a series against a checkpoint and flag faults");
  add_common(detect_cmd, detect_c);

  CLI::App* isolate_cmd =
      app.add_subcommand("isolate", "detect and rank variables by fault responsibility");
  add_common(isolate_cmd, isolate_c);

  CLI::App* evaluate_cmd =
      app.add_subcommand("evaluate", "compare a fault report against labeled data");
  add_common(evaluate_cmd, evaluate_c);

  CLI::App* synth_cmd =
      app.add_subcommand("synth", "generate a synthetic series, optionally with a fault");
  add_common(synth_cmd, synth_c);

  CLI11_PARSE(app, argc, argv);

  if (train_cmd->parsed()) {
    RunConfig cfg = make_config(train_cmd, train_c);
    if (train_cmd->count("--epochs") > 0) cfg.train.epochs = epochs_override;
    return cmd_train(cfg, train_c);
  }
  if (detect_cmd->parsed()) return cmd_detect(make_config(detect_cmd, detect_c), detect_c);
  if (isolate_cmd->parsed()) return cmd_isolate(make_config(isolate_cmd, isolate_c), isolate_c);
  if (evaluate_cmd->parsed()) return cmd_evaluate(make_config(evaluate_cmd, evaluate_c), evaluate_c);
  if (synth_cmd->parsed()) return cmd_synth(make_config(synth_cmd, synth_c), synth_c);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const gawno::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const gawno::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const gawno::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const gawno::ShapeError& e) {
    std::cerr << "shape error: " << e.what() << "\n";
    return 1;
  } catch (const gawno::StateError& e) {
    std::cerr << "state error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
