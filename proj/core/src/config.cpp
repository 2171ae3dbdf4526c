#include "gawno/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gawno/errors.hpp"

namespace gawno {
namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& section, const std::string& key,
                            const std::string& value, const char* want) {
  throw ConfigError("config key '" + key + "' in section [" + section + "]: cannot parse '" +
                    value + "' as " + want);
}

double parse_double(const std::string& section, const std::string& key, const std::string& value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    bad_value(section, key, value, "a number");
  return out;
}

std::int64_t parse_int(const std::string& section, const std::string& key,
                       const std::string& value) {
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    bad_value(section, key, value, "an integer");
  return out;
}

std::uint64_t parse_u64(const std::string& section, const std::string& key,
                        const std::string& value) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    bad_value(section, key, value, "an unsigned integer");
  return out;
}

bool parse_bool(const std::string& section, const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(section, key, value, "a boolean (true/false)");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  if (trim(value).empty()) return out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::vector<double> parse_double_list(const std::string& section, const std::string& key,
                                      const std::string& value) {
  std::vector<double> out;
  for (const auto& item : split_list(value)) out.push_back(parse_double(section, key, item));
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_list(const std::vector<double>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += fmt(v[i]);
  }
  return out;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += v[i];
  }
  return out;
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::string section;
  std::stringstream stream(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(stream, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": malformed section header '" +
                          line + "'");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "model" && section != "train" && section != "data" && section != "detect" &&
          section != "fault" && section != "synth" && section != "paths" &&
          section != "normalization")
        throw ConfigError("unknown config section [" + section + "]");
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value, got '" +
                        line + "'");
    if (section.empty())
      throw ConfigError("config line " + std::to_string(lineno) + ": key outside any section");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));

    auto unknown = [&]() -> ConfigError {
      return ConfigError("unknown key '" + key + "' in config section [" + section + "]");
    };

    if (section == "model") {
      if (key == "features") cfg.model.features = static_cast<int>(parse_int(section, key, value));
      else if (key == "length") cfg.model.length = parse_int(section, key, value);
      else if (key == "lifted_width") cfg.model.lifted_width = static_cast<int>(parse_int(section, key, value));
      else if (key == "wavelet") cfg.model.wavelet = value;
      else if (key == "levels") cfg.model.levels = static_cast<int>(parse_int(section, key, value));
      else if (key == "keep_from") cfg.model.keep_from = static_cast<int>(parse_int(section, key, value));
      else if (key == "projection_hidden") cfg.model.projection_hidden = static_cast<int>(parse_int(section, key, value));
      else if (key == "head_hidden") cfg.model.head_hidden = static_cast<int>(parse_int(section, key, value));
      else throw unknown();
    } else if (section == "train") {
      if (key == "epochs") cfg.train.epochs = static_cast<int>(parse_int(section, key, value));
      else if (key == "batch_size") cfg.train.batch_size = static_cast<int>(parse_int(section, key, value));
      else if (key == "learning_rate") cfg.train.learning_rate = parse_double(section, key, value);
      else if (key == "weight_decay") cfg.train.weight_decay = parse_double(section, key, value);
      else if (key == "beta1") cfg.train.beta1 = parse_double(section, key, value);
      else if (key == "beta2") cfg.train.beta2 = parse_double(section, key, value);
      else if (key == "adam_eps") cfg.train.adam_eps = parse_double(section, key, value);
      else if (key == "grad_clip") cfg.train.grad_clip = parse_double(section, key, value);
      else if (key == "label_smoothing") cfg.train.label_smoothing = parse_double(section, key, value);
      else if (key == "seed") cfg.train.seed = parse_u64(section, key, value);
      else throw unknown();
    } else if (section == "data") {
      if (key == "train") cfg.data.train_path = value;
      else if (key == "validation") cfg.data.validation_path = value;
      else if (key == "test") cfg.data.test_path = value;
      else if (key == "stride") cfg.data.stride = parse_int(section, key, value);
      else throw unknown();
    } else if (section == "detect") {
      if (key == "noise_draws") cfg.detect.noise_draws = static_cast<int>(parse_int(section, key, value));
      else if (key == "sigma_k") cfg.detect.sigma_k = parse_double(section, key, value);
      else if (key == "smooth_window") cfg.detect.smooth_window = static_cast<int>(parse_int(section, key, value));
      else throw unknown();
    } else if (section == "fault") {
      if (key == "inject") cfg.fault.inject = parse_bool(section, key, value);
      else if (key == "kind") cfg.fault.kind = value;
      else if (key == "variable") cfg.fault.variable = static_cast<int>(parse_int(section, key, value));
      else if (key == "onset") cfg.fault.onset = parse_int(section, key, value);
      else if (key == "magnitude") cfg.fault.magnitude = parse_double(section, key, value);
      else throw unknown();
    } else if (section == "synth") {
      if (key == "variables") cfg.synth.variables = static_cast<int>(parse_int(section, key, value));
      else if (key == "steps") cfg.synth.steps = parse_int(section, key, value);
      else if (key == "latents") cfg.synth.latents = static_cast<int>(parse_int(section, key, value));
      else if (key == "period") cfg.synth.period = parse_int(section, key, value);
      else if (key == "noise_std") cfg.synth.noise_std = parse_double(section, key, value);
      else if (key == "ar_coeff") cfg.synth.ar_coeff = parse_double(section, key, value);
      else throw unknown();
    } else if (section == "paths") {
      if (key == "checkpoint") cfg.paths.checkpoint = value;
      else if (key == "report") cfg.paths.report = value;
      else if (key == "log") cfg.paths.log = value;
      else if (key == "out") cfg.paths.out = value;
      else throw unknown();
    } else {  // normalization
      if (key == "names") cfg.normalization.names = split_list(value);
      else if (key == "mean") cfg.normalization.mean = parse_double_list(section, key, value);
      else if (key == "stddev") cfg.normalization.stddev = parse_double_list(section, key, value);
      else if (key == "min") cfg.normalization.min = parse_double_list(section, key, value);
      else if (key == "max") cfg.normalization.max = parse_double_list(section, key, value);
      else throw unknown();
    }
  }
  const auto& nn = cfg.normalization;
  if (nn.vars() > 0) {
    if (nn.names.size() != nn.mean.size() || nn.stddev.size() != nn.mean.size() ||
        nn.min.size() != nn.mean.size() || nn.max.size() != nn.mean.size())
      throw ConfigError("config section [normalization]: names/mean/stddev/min/max lengths differ");
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string RunConfig::serialize() const {
  std::string out;
  out += "[model]\n";
  out += "features = " + std::to_string(model.features) + "\n";
  out += "length = " + std::to_string(model.length) + "\n";
  out += "lifted_width = " + std::to_string(model.lifted_width) + "\n";
  out += "wavelet = " + model.wavelet + "\n";
  out += "levels = " + std::to_string(model.levels) + "\n";
  out += "keep_from = " + std::to_string(model.keep_from) + "\n";
  out += "projection_hidden = " + std::to_string(model.projection_hidden) + "\n";
  out += "head_hidden = " + std::to_string(model.head_hidden) + "\n";
  out += "\n[train]\n";
  out += "epochs = " + std::to_string(train.epochs) + "\n";
  out += "batch_size = " + std::to_string(train.batch_size) + "\n";
  out += "learning_rate = " + fmt(train.learning_rate) + "\n";
  out += "weight_decay = " + fmt(train.weight_decay) + "\n";
  out += "beta1 = " + fmt(train.beta1) + "\n";
  out += "beta2 = " + fmt(train.beta2) + "\n";
  out += "adam_eps = " + fmt(train.adam_eps) + "\n";
  out += "grad_clip = " + fmt(train.grad_clip) + "\n";
  out += "label_smoothing = " + fmt(train.label_smoothing) + "\n";
  out += "seed = " + std::to_string(train.seed) + "\n";
  out += "\n[data]\n";
  out += "train = " + data.train_path + "\n";
  out += "validation = " + data.validation_path + "\n";
  out += "test = " + data.test_path + "\n";
  out += "stride = " + std::to_string(data.stride) + "\n";
  out += "\n[detect]\n";
  out += "noise_draws = " + std::to_string(detect.noise_draws) + "\n";
  out += "sigma_k = " + fmt(detect.sigma_k) + "\n";
  out += "smooth_window = " + std::to_string(detect.smooth_window) + "\n";
  out += "\n[fault]\n";
  out += "inject = " + std::string(fault.inject ? "true" : "false") + "\n";
  out += "kind = " + fault.kind + "\n";
  out += "variable = " + std::to_string(fault.variable) + "\n";
  out += "onset = " + std::to_string(fault.onset) + "\n";
  out += "magnitude = " + fmt(fault.magnitude) + "\n";
  out += "\n[synth]\n";
  out += "variables = " + std::to_string(synth.variables) + "\n";
  out += "steps = " + std::to_string(synth.steps) + "\n";
  out += "latents = " + std::to_string(synth.latents) + "\n";
  out += "period = " + std::to_string(synth.period) + "\n";
  out += "noise_std = " + fmt(synth.noise_std) + "\n";
  out += "ar_coeff = " + fmt(synth.ar_coeff) + "\n";
  out += "\n[paths]\n";
  out += "checkpoint = " + paths.checkpoint + "\n";
  out += "report = " + paths.report + "\n";
  out += "log = " + paths.log + "\n";
  out += "out = " + paths.out + "\n";
  if (normalization.vars() > 0) {
    out += "\n[normalization]\n";
    out += "names = " + join(normalization.names) + "\n";
    out += "mean = " + fmt_list(normalization.mean) + "\n";
    out += "stddev = " + fmt_list(normalization.stddev) + "\n";
    out += "min = " + fmt_list(normalization.min) + "\n";
    out += "max = " + fmt_list(normalization.max) + "\n";
  }
  return out;
}

GeneratorSpec RunConfig::generator_spec() const {
  GeneratorSpec spec;
  spec.features = model.features;
  spec.length = model.length;
  spec.lifted_width = model.lifted_width;
  spec.wavelet = model.wavelet;
  spec.levels = model.levels;
  spec.keep_from = model.keep_from;
  spec.projection_hidden = model.projection_hidden;
  return spec;
}

DiscriminatorSpec RunConfig::discriminator_spec() const {
  DiscriminatorSpec spec;
  spec.body = generator_spec();
  spec.head_hidden = model.head_hidden;
  return spec;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig cfg;
  cfg.epochs = train.epochs;
  cfg.batch_size = train.batch_size;
  cfg.learning_rate = train.learning_rate;
  cfg.weight_decay = train.weight_decay;
  cfg.beta1 = train.beta1;
  cfg.beta2 = train.beta2;
  cfg.adam_eps = train.adam_eps;
  cfg.grad_clip = train.grad_clip;
  cfg.label_smoothing = train.label_smoothing;
  cfg.seed = train.seed;
  return cfg;
}

DetectConfig RunConfig::detect_config() const {
  DetectConfig cfg;
  cfg.window = model.length;
  cfg.stride = data.stride;
  cfg.noise_draws = detect.noise_draws;
  cfg.sigma_k = detect.sigma_k;
  cfg.smooth_window = detect.smooth_window;
  cfg.seed = train.seed;
  return cfg;
}

FaultSpec RunConfig::fault_spec() const {
  FaultSpec spec;
  spec.kind = fault_kind_from_name(fault.kind);
  spec.variable = fault.variable;
  spec.onset = fault.onset;
  spec.magnitude = fault.magnitude;
  return spec;
}

SynthConfig RunConfig::synth_config() const {
  SynthConfig cfg;
  cfg.latents = synth.latents;
  cfg.period = synth.period;
  cfg.noise_std = synth.noise_std;
  cfg.ar_coeff = synth.ar_coeff;
  return cfg;
}

}  // namespace gawno
