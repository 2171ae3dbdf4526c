#include "gawno/fdi.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "gawno/rng.hpp"

namespace gawno {

double FaultReport::flagged_fraction() const {
  if (flag.empty()) return 0.0;
  std::int64_t n = 0;
  for (std::uint8_t f : flag) n += f;
  return static_cast<double>(n) / static_cast<double>(flag.size());
}

Tensor reconstruct(const Tensor& x, const GeneratorSpec& spec, const ParamStore& gen,
                   int noise_draws, std::uint64_t seed) {
  spec.validate();
  if (x.rank() != 3 || x.dim(1) != spec.features || x.dim(2) != spec.length) {
    throw ShapeError("reconstruct: input " + shape_str(x.shape()) + " does not match spec");
  }
  if (noise_draws < 1) throw ConfigError("reconstruct: noise_draws must be >= 1");

  const std::int64_t B = x.dim(0), F = x.dim(1), n = x.dim(2), N = noise_draws;

  Rng rng(seed);
  Tensor z(Shape{N, F, n});
  rng.fill_normal(z.data());
  Tensor candidates = generator_forward(z, spec, gen);

  Tensor out(Shape{B, F, n});
  const double* xp = x.data().data();
  const double* cp = candidates.data().data();
  double* op = out.data().data();
  const std::int64_t sample = F * n;
  for (std::int64_t b = 0; b < B; ++b) {
    std::int64_t best = 0;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::int64_t i = 0; i < N; ++i) {
      double err = 0.0;
      const double* cb = cp + i * sample;
      const double* xb = xp + b * sample;
      for (std::int64_t j = 0; j < sample; ++j) {
        const double d = cb[j] - xb[j];
        err += d * d;
      }
      if (err < best_err) {
        best_err = err;
        best = i;
      }
    }
    std::copy(cp + best * sample, cp + (best + 1) * sample, op + b * sample);
  }
  return out;
}

std::vector<std::vector<double>> reconstruction_errors(const SeriesTable& normalized,
                                                       const GeneratorSpec& spec,
                                                       const ParamStore& gen,
                                                       const DetectConfig& cfg) {
  const std::int64_t T = normalized.rows(), F = normalized.cols(), n = cfg.window;
  if (F != spec.features) {
    throw DataError("reconstruction_errors: series has " + std::to_string(F) +
                    " variables, spec expects " + std::to_string(spec.features));
  }
  WindowSet set = window(normalized, n, cfg.stride);
  std::vector<std::int64_t> starts = set.starts;
  // The spec'd window count leaves a tail uncovered when the stride does not
  // tile T - n; reconstruct one extra window there so every timestep scores.
  if (starts.back() + n < T) starts.push_back(T - n);

  const std::int64_t W = static_cast<std::int64_t>(starts.size());
  Tensor batch(Shape{W, F, n});
  {
    double* bp = batch.data().data();
    for (std::int64_t k = 0; k < W; ++k) {
      for (std::int64_t f = 0; f < F; ++f) {
        for (std::int64_t t = 0; t < n; ++t) {
          bp[(k * F + f) * n + t] = normalized.at(starts[static_cast<size_t>(k)] + t, f);
        }
      }
    }
  }
  Tensor recon = reconstruct(batch, spec, gen, cfg.noise_draws, cfg.seed);

  std::vector<std::vector<double>> errors(static_cast<size_t>(F),
                                          std::vector<double>(static_cast<size_t>(T), 0.0));
  std::vector<std::int64_t> coverage(static_cast<size_t>(T), 0);
  const double* bp = batch.data().data();
  const double* rp = recon.data().data();
  for (std::int64_t k = 0; k < W; ++k) {
    const std::int64_t start = starts[static_cast<size_t>(k)];
    for (std::int64_t t = 0; t < n; ++t) ++coverage[static_cast<size_t>(start + t)];
    for (std::int64_t f = 0; f < F; ++f) {
      const double* xrow = bp + (k * F + f) * n;
      const double* rrow = rp + (k * F + f) * n;
      auto& dst = errors[static_cast<size_t>(f)];
      for (std::int64_t t = 0; t < n; ++t) {
        const double d = xrow[t] - rrow[t];
        dst[static_cast<size_t>(start + t)] += d * d;
      }
    }
  }
  for (std::int64_t t = 0; t < T; ++t) {
    const double c = static_cast<double>(std::max<std::int64_t>(coverage[static_cast<size_t>(t)], 1));
    for (std::int64_t f = 0; f < F; ++f) errors[static_cast<size_t>(f)][static_cast<size_t>(t)] /= c;
  }
  return errors;
}

std::vector<double> smooth_ma(const std::vector<double>& series, int window) {
  if (window < 1) throw ConfigError("smooth_ma: window must be >= 1");
  const std::int64_t T = static_cast<std::int64_t>(series.size());
  const std::int64_t reach = (window - 1) / 2;
  std::vector<double> out(series.size());
  for (std::int64_t t = 0; t < T; ++t) {
    const std::int64_t a = std::max<std::int64_t>(0, t - reach);
    const std::int64_t b = std::min<std::int64_t>(T - 1, t + reach);
    double acc = 0.0;
    for (std::int64_t i = a; i <= b; ++i) acc += series[static_cast<size_t>(i)];
    out[static_cast<size_t>(t)] = acc / static_cast<double>(b - a + 1);
  }
  return out;
}

ThresholdModel fit_threshold(const std::vector<std::vector<double>>& normal_errors, double k) {
  if (normal_errors.empty()) throw DataError("fit_threshold: no variables");
  ThresholdModel model;
  model.sigma_k = k;
  double acc = 0.0;
  for (const auto& series : normal_errors) {
    const std::int64_t n = static_cast<std::int64_t>(series.size());
    if (n < 2) throw DataError("fit_threshold: need at least 2 error samples per variable");
    double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : series) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    model.mean.push_back(mean);
    model.stddev.push_back(sd);
    acc += mean + k * sd;
  }
  model.global_threshold = acc / static_cast<double>(normal_errors.size());
  return model;
}

FaultReport detect(const SeriesTable& normalized, const ThresholdModel& model,
                   const GeneratorSpec& spec, const ParamStore& gen, const DetectConfig& cfg) {
  if (static_cast<std::int64_t>(model.mean.size()) != normalized.cols()) {
    throw StateError("detect: threshold model covers " + std::to_string(model.mean.size()) +
                     " variables, series has " + std::to_string(normalized.cols()));
  }
  std::vector<std::vector<double>> errors = reconstruction_errors(normalized, spec, gen, cfg);
  const std::int64_t F = normalized.cols(), T = normalized.rows();

  FaultReport report;
  report.threshold = model.global_threshold;
  report.residual.resize(static_cast<size_t>(F));
  report.var_flag.assign(static_cast<size_t>(F), std::vector<std::uint8_t>(static_cast<size_t>(T), 0));
  report.score.assign(static_cast<size_t>(T), 0.0);
  report.flag.assign(static_cast<size_t>(T), 0);

  for (std::int64_t f = 0; f < F; ++f) {
    const size_t fi = static_cast<size_t>(f);
    report.residual[fi] = smooth_ma(errors[fi], cfg.smooth_window);
    const double vt = model.variable_threshold(f);
    for (std::int64_t t = 0; t < T; ++t) {
      const size_t ti = static_cast<size_t>(t);
      report.score[ti] += report.residual[fi][ti] / static_cast<double>(F);
      if (report.residual[fi][ti] > vt) report.var_flag[fi][ti] = 1;
    }
  }
  for (std::int64_t t = 0; t < T; ++t) {
    const size_t ti = static_cast<size_t>(t);
    if (report.score[ti] > model.global_threshold) {
      report.flag[ti] = 1;
      if (!report.onset) report.onset = t;
    }
  }
  return report;
}

std::vector<int> isolate(const FaultReport& report, const ThresholdModel& model) {
  if (report.residual.empty()) throw StateError("isolate: report carries no residuals");
  if (static_cast<std::int64_t>(model.mean.size()) != report.vars()) {
    throw StateError("isolate: model/report variable count mismatch");
  }
  std::vector<std::int64_t> flagged;
  for (std::int64_t t = 0; t < report.steps(); ++t) {
    if (report.flag[static_cast<size_t>(t)]) flagged.push_back(t);
  }
  if (flagged.empty()) return {};

  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, int>> scored;
  for (std::int64_t f = 0; f < report.vars(); ++f) {
    const size_t fi = static_cast<size_t>(f);
    double peak = -inf;
    for (std::int64_t t : flagged) {
      const double resid = report.residual[fi][static_cast<size_t>(t)];
      double standardized;
      if (model.stddev[fi] > 0.0) {
        standardized = (resid - model.mean[fi]) / model.stddev[fi];
      } else {
        standardized = resid != 0.0 ? inf : -inf;
      }
      peak = std::max(peak, standardized);
    }
    scored.emplace_back(peak, static_cast<int>(f));
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<int> ranked;
  for (const auto& [value, idx] : scored) ranked.push_back(idx);
  return ranked;
}

MetricsResult metrics(const ConfusionCounts& counts) {
  MetricsResult out;
  const double tp = static_cast<double>(counts.tp);
  if (counts.tp + counts.fp > 0) {
    out.precision = tp / static_cast<double>(counts.tp + counts.fp);
  } else {
    out.degenerate = true;
  }
  if (counts.tp + counts.fn > 0) {
    out.recall = tp / static_cast<double>(counts.tp + counts.fn);
  } else {
    out.degenerate = true;
  }
  if (out.precision + out.recall > 0.0) {
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  } else {
    out.degenerate = true;
  }
  return out;
}

double auc_roc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    throw ShapeError("auc_roc: scores and labels differ in length");
  }
  const size_t n = scores.size();
  std::int64_t pos = 0;
  for (std::uint8_t l : labels) pos += l ? 1 : 0;
  const std::int64_t neg = static_cast<std::int64_t>(n) - pos;
  if (pos == 0 || neg == 0) {
    throw DataError("auc_roc: both classes must be present");
  }

  // Rank-sum form with average ranks on ties, equivalent to pairwise
  // counting with half-credit ties.
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (size_t k = i; k <= j; ++k) {
      if (labels[order[k]]) rank_sum_pos += avg_rank;
    }
    i = j + 1;
  }
  const double p = static_cast<double>(pos);
  return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

void save_fault_report(const FaultReport& report, const std::vector<std::string>& names,
                       const std::filesystem::path& path) {
  if (static_cast<std::int64_t>(names.size()) != report.vars()) {
    throw StateError("save_fault_report: name count does not match report variables");
  }
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.precision(17);
    out << "t,score,flag";
    for (const auto& name : names) out << ",residual_" << name << ",flag_" << name;
    out << "\n";
    for (std::int64_t t = 0; t < report.steps(); ++t) {
      const size_t ti = static_cast<size_t>(t);
      out << t << "," << report.score[ti] << "," << static_cast<int>(report.flag[ti]);
      for (std::int64_t f = 0; f < report.vars(); ++f) {
        const size_t fi = static_cast<size_t>(f);
        out << "," << report.residual[fi][ti] << "," << static_cast<int>(report.var_flag[fi][ti]);
      }
      out << "\n";
    }
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

FaultReport load_fault_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty report '" + path.string() + "'");
  std::istringstream hs(line);
  std::vector<std::string> header;
  std::string cell;
  while (std::getline(hs, cell, ',')) header.push_back(cell);
  if (header.size() < 3 || header[0] != "t" || header[1] != "score" || header[2] != "flag" ||
      (header.size() - 3) % 2 != 0) {
    throw DataError("malformed report header in '" + path.string() + "'");
  }
  const std::int64_t F = static_cast<std::int64_t>((header.size() - 3) / 2);

  FaultReport report;
  report.residual.resize(static_cast<size_t>(F));
  report.var_flag.resize(static_cast<size_t>(F));
  std::int64_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != header.size()) {
      throw DataError("report row " + std::to_string(row) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(header.size()));
    }
    try {
      report.score.push_back(std::stod(cells[1]));
      report.flag.push_back(static_cast<std::uint8_t>(std::stoi(cells[2]) != 0));
      for (std::int64_t f = 0; f < F; ++f) {
        report.residual[static_cast<size_t>(f)].push_back(std::stod(cells[static_cast<size_t>(3 + 2 * f)]));
        report.var_flag[static_cast<size_t>(f)].push_back(
            static_cast<std::uint8_t>(std::stoi(cells[static_cast<size_t>(4 + 2 * f)]) != 0));
      }
    } catch (const std::exception&) {
      throw DataError("report row " + std::to_string(row) + " has a non-numeric cell");
    }
  }
  for (std::int64_t t = 0; t < report.steps(); ++t) {
    if (report.flag[static_cast<size_t>(t)]) {
      report.onset = t;
      break;
    }
  }
  return report;
}

}  // namespace gawno
