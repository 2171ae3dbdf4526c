#include "gawno/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "gawno/rng.hpp"

namespace gawno {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_cell(const std::string& cell, std::int64_t row, std::int64_t col) {
  double v = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
    throw DataError("csv: unparsable cell '" + cell + "' at row " + std::to_string(row) +
                    ", column " + std::to_string(col));
  }
  return v;
}

// Sample standard deviation with the (n-1) denominator.
std::pair<double, double> mean_and_std(const double* x, std::int64_t n, std::int64_t stride) {
  double mean = 0.0;
  for (std::int64_t i = 0; i < n; ++i) mean += x[i * stride];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = x[i * stride] - mean;
    ss += d * d;
  }
  const double var = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
  return {mean, std::sqrt(var)};
}

}  // namespace

std::string fault_kind_name(FaultKind kind) {
  switch (kind) {
    case FaultKind::kStep:
      return "step";
    case FaultKind::kRandomVariation:
      return "random_variation";
    case FaultKind::kSlowDrift:
      return "slow_drift";
    case FaultKind::kSticking:
      return "sticking";
  }
  return "step";
}

FaultKind fault_kind_from_name(const std::string& name) {
  if (name == "step") return FaultKind::kStep;
  if (name == "random_variation") return FaultKind::kRandomVariation;
  if (name == "slow_drift") return FaultKind::kSlowDrift;
  if (name == "sticking") return FaultKind::kSticking;
  throw ConfigError("unknown fault kind '" + name +
                    "' (expected step, random_variation, slow_drift, or sticking)");
}

SeriesTable load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty file '" + path.string() + "'");
  std::vector<std::string> header = split_csv_line(line);
  if (header.empty()) throw DataError("missing header in '" + path.string() + "'");

  const bool has_label = header.back() == "label";
  const std::int64_t F = static_cast<std::int64_t>(header.size()) - (has_label ? 1 : 0);
  if (F < 1) throw DataError("no variable columns in '" + path.string() + "'");

  SeriesTable table;
  table.names.assign(header.begin(), header.begin() + F);

  std::int64_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (static_cast<std::int64_t>(cells.size()) != F + (has_label ? 1 : 0)) {
      throw DataError("csv: row " + std::to_string(row) + " has " +
                      std::to_string(cells.size()) + " cells, expected " +
                      std::to_string(F + (has_label ? 1 : 0)));
    }
    for (std::int64_t f = 0; f < F; ++f) {
      table.values.push_back(parse_cell(cells[static_cast<size_t>(f)], row, f + 1));
    }
    if (has_label) {
      const double lv = parse_cell(cells.back(), row, F + 1);
      if (lv != 0.0 && lv != 1.0) {
        throw DataError("csv: label must be 0 or 1 at row " + std::to_string(row));
      }
      table.labels.push_back(lv != 0.0 ? 1 : 0);
    }
  }
  if (table.rows() == 0) throw DataError("no data rows in '" + path.string() + "'");
  return table;
}

void save_csv(const SeriesTable& table, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.precision(17);
    for (size_t f = 0; f < table.names.size(); ++f) {
      out << (f ? "," : "") << table.names[f];
    }
    if (table.has_labels()) out << ",label";
    out << "\n";
    for (std::int64_t t = 0; t < table.rows(); ++t) {
      for (std::int64_t f = 0; f < table.cols(); ++f) {
        out << (f ? "," : "") << table.at(t, f);
      }
      if (table.has_labels()) out << "," << static_cast<int>(table.labels[static_cast<size_t>(t)]);
      out << "\n";
    }
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

NormStats fit_norm(const SeriesTable& train) {
  if (train.rows() < 2) throw DataError("fit_norm: need at least 2 rows");
  NormStats stats;
  stats.names = train.names;
  const std::int64_t F = train.cols(), T = train.rows();
  for (std::int64_t f = 0; f < F; ++f) {
    auto [mean, sd] = mean_and_std(train.values.data() + f, T, F);
    double lo = train.at(0, f), hi = lo;
    for (std::int64_t t = 1; t < T; ++t) {
      lo = std::min(lo, train.at(t, f));
      hi = std::max(hi, train.at(t, f));
    }
    if (sd <= 0.0 || lo >= hi) {
      throw DataError("fit_norm: variable '" + train.names[static_cast<size_t>(f)] +
                      "' is constant");
    }
    stats.mean.push_back(mean);
    stats.stddev.push_back(sd);
    stats.min.push_back(lo);
    stats.max.push_back(hi);
  }
  return stats;
}

namespace {

void require_stats_match(const SeriesTable& x, const NormStats& stats, const char* op) {
  if (x.cols() != stats.vars()) {
    throw DataError(std::string(op) + ": table has " + std::to_string(x.cols()) +
                    " variables, stats have " + std::to_string(stats.vars()));
  }
}

}  // namespace

SeriesTable normalize(const SeriesTable& x, const NormStats& stats) {
  require_stats_match(x, stats, "normalize");
  SeriesTable out = x;
  const std::int64_t F = x.cols();
  for (std::int64_t f = 0; f < F; ++f) {
    const size_t fi = static_cast<size_t>(f);
    const double zmin = (stats.min[fi] - stats.mean[fi]) / stats.stddev[fi];
    const double zmax = (stats.max[fi] - stats.mean[fi]) / stats.stddev[fi];
    for (std::int64_t t = 0; t < x.rows(); ++t) {
      const double z = (x.at(t, f) - stats.mean[fi]) / stats.stddev[fi];
      out.at(t, f) = -1.0 + 2.0 * (z - zmin) / (zmax - zmin);
    }
  }
  return out;
}

SeriesTable denormalize(const SeriesTable& x, const NormStats& stats) {
  require_stats_match(x, stats, "denormalize");
  SeriesTable out = x;
  const std::int64_t F = x.cols();
  for (std::int64_t f = 0; f < F; ++f) {
    const size_t fi = static_cast<size_t>(f);
    const double zmin = (stats.min[fi] - stats.mean[fi]) / stats.stddev[fi];
    const double zmax = (stats.max[fi] - stats.mean[fi]) / stats.stddev[fi];
    for (std::int64_t t = 0; t < x.rows(); ++t) {
      const double z = zmin + (x.at(t, f) + 1.0) * 0.5 * (zmax - zmin);
      out.at(t, f) = stats.mean[fi] + z * stats.stddev[fi];
    }
  }
  return out;
}

WindowSet window(const SeriesTable& x, std::int64_t length, std::int64_t stride) {
  if (stride < 1) throw ConfigError("window: stride must be >= 1");
  if (length < 1 || length > x.rows()) {
    throw DataError("window: length " + std::to_string(length) +
                    " exceeds series length " + std::to_string(x.rows()));
  }
  const std::int64_t F = x.cols();
  const std::int64_t count = (x.rows() - length) / stride + 1;
  WindowSet set;
  set.windows = Tensor(Shape{count, F, length});
  double* wp = set.windows.data().data();
  for (std::int64_t k = 0; k < count; ++k) {
    const std::int64_t start = k * stride;
    set.starts.push_back(start);
    std::uint8_t label = 0;
    for (std::int64_t f = 0; f < F; ++f) {
      for (std::int64_t t = 0; t < length; ++t) {
        wp[(k * F + f) * length + t] = x.at(start + t, f);
      }
    }
    if (x.has_labels()) {
      for (std::int64_t t = 0; t < length; ++t) {
        if (x.labels[static_cast<size_t>(start + t)]) label = 1;
      }
    }
    set.labels.push_back(label);
  }
  return set;
}

SeriesTable synth_process(int features, std::int64_t steps, std::uint64_t seed,
                          const SynthConfig& cfg) {
  if (features < 2) throw ConfigError("synth_process: need at least 2 variables");
  if (steps < 1) throw ConfigError("synth_process: need at least 1 step");
  if (cfg.latents < 1 || cfg.period < 2) throw ConfigError("synth_process: bad latent config");

  Rng root(seed);
  Rng harmonics_rng = root.stream(1);
  Rng gain_rng = root.stream(2);
  Rng shift_rng = root.stream(3);
  Rng noise_rng = root.stream(4);

  // Distinct integer harmonics over the shared period keep every channel
  // exactly periodic when the noise is disabled.
  std::vector<int> pool;
  for (int k = 2; k <= 12; ++k) pool.push_back(k);
  for (size_t i = pool.size(); i > 1; --i) {
    const size_t j = static_cast<size_t>(harmonics_rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(pool[i - 1], pool[j]);
  }
  const int L = cfg.latents;
  std::vector<int> harmonic(static_cast<size_t>(L));
  for (int l = 0; l < L; ++l) harmonic[static_cast<size_t>(l)] = pool[static_cast<size_t>(l) % pool.size()];

  // One sine table per latent, indexed mod period.
  std::vector<std::vector<double>> latent_table(static_cast<size_t>(L));
  for (int l = 0; l < L; ++l) {
    auto& tab = latent_table[static_cast<size_t>(l)];
    tab.resize(static_cast<size_t>(cfg.period));
    for (std::int64_t i = 0; i < cfg.period; ++i) {
      constexpr double kTwoPi = 6.283185307179586476925286766559;
      tab[static_cast<size_t>(i)] =
          std::sin(kTwoPi * harmonic[static_cast<size_t>(l)] * static_cast<double>(i) /
                   static_cast<double>(cfg.period));
    }
  }

  // Positive gains keep channels positively correlated through the shared
  // latents; small integer shifts decorrelate them mildly.
  std::vector<double> gain(static_cast<size_t>(features * L));
  std::vector<std::int64_t> shift(static_cast<size_t>(features * L));
  for (int c = 0; c < features; ++c) {
    for (int l = 0; l < L; ++l) {
      gain[static_cast<size_t>(c * L + l)] = 0.5 + 0.5 * gain_rng.uniform();
      shift[static_cast<size_t>(c * L + l)] = shift_rng.uniform_int(-2, 2);
    }
  }

  SeriesTable table;
  for (int c = 0; c < features; ++c) table.names.push_back("var" + std::to_string(c));
  table.values.assign(static_cast<size_t>(steps * features), 0.0);

  std::vector<double> ar(static_cast<size_t>(features), 0.0);
  for (std::int64_t t = 0; t < steps; ++t) {
    for (int c = 0; c < features; ++c) {
      double v = 0.0;
      for (int l = 0; l < L; ++l) {
        const std::int64_t idx =
            ((t + shift[static_cast<size_t>(c * L + l)]) % cfg.period + cfg.period) % cfg.period;
        v += gain[static_cast<size_t>(c * L + l)] * latent_table[static_cast<size_t>(l)][static_cast<size_t>(idx)];
      }
      if (cfg.noise_std > 0.0) {
        auto& e = ar[static_cast<size_t>(c)];
        e = cfg.ar_coeff * e + noise_rng.normal() * cfg.noise_std;
        v += e;
      }
      table.values[static_cast<size_t>(t * features + c)] = v;
    }
  }
  return table;
}

SeriesTable inject_fault(const SeriesTable& x, const FaultSpec& spec, std::uint64_t seed) {
  const std::int64_t T = x.rows(), F = x.cols();
  if (spec.variable < 0 || spec.variable >= F) {
    throw DataError("inject_fault: variable index " + std::to_string(spec.variable) +
                    " out of range [0, " + std::to_string(F) + ")");
  }
  if (spec.onset < 0 || spec.onset >= T) {
    throw DataError("inject_fault: onset " + std::to_string(spec.onset) +
                    " outside series of length " + std::to_string(T));
  }
  if (spec.magnitude < 0.0) throw ConfigError("inject_fault: magnitude must be >= 0");

  const std::int64_t v = spec.variable;
  auto [mean, sd] = mean_and_std(x.values.data() + v, T, F);
  (void)mean;
  const double amp = spec.magnitude * sd;

  SeriesTable out = x;
  Rng rng(seed);
  switch (spec.kind) {
    case FaultKind::kStep:
      for (std::int64_t t = spec.onset; t < T; ++t) out.at(t, v) += amp;
      break;
    case FaultKind::kRandomVariation:
      for (std::int64_t t = spec.onset; t < T; ++t) out.at(t, v) += rng.normal() * amp;
      break;
    case FaultKind::kSlowDrift: {
      const double span = static_cast<double>(std::max<std::int64_t>(T - 1 - spec.onset, 1));
      for (std::int64_t t = spec.onset; t < T; ++t) {
        out.at(t, v) += amp * static_cast<double>(t - spec.onset) / span;
      }
      break;
    }
    case FaultKind::kSticking: {
      const double frozen = x.at(spec.onset, v);
      for (std::int64_t t = spec.onset; t < T; ++t) out.at(t, v) = frozen;
      break;
    }
  }
  out.labels.assign(static_cast<size_t>(T), 0);
  if (x.has_labels()) out.labels = x.labels;
  for (std::int64_t t = spec.onset; t < T; ++t) out.labels[static_cast<size_t>(t)] = 1;
  return out;
}

}  // namespace gawno
