#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include "gawno/training.hpp"

namespace gawno {

namespace {

constexpr std::uint16_t kCheckpointVersion = 1;

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, sizeof(bits));
  put_u64(out, bits);
}

class Reader {
 public:
  Reader(const std::string& data, std::string path) : data_(data), path_(std::move(path)) {}

  std::uint16_t u16() {
    const std::uint32_t lo = byte(), hi = byte();
    return static_cast<std::uint16_t>(lo | (hi << 8));
  }

  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
    return v;
  }

  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte()) << (8 * i);
    return v;
  }

  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
  }

  std::string bytes(size_t count) {
    require(count);
    std::string s = data_.substr(pos_, count);
    pos_ += count;
    return s;
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  std::uint32_t byte() {
    require(1);
    return static_cast<unsigned char>(data_[pos_++]);
  }

  void require(size_t count) {
    if (pos_ + count > data_.size()) {
      throw DataError("corrupt checkpoint '" + path_ + "': truncated at byte " +
                      std::to_string(pos_));
    }
  }

  const std::string& data_;
  std::string path_;
  size_t pos_ = 0;
};

void serialize_store(std::string& out, const ParamStore& store) {
  put_u32(out, static_cast<std::uint32_t>(store.size()));
  for (const auto& name : store.names()) {
    const Tensor t = store.at(name);
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    put_u32(out, static_cast<std::uint32_t>(t.rank()));
    for (std::int64_t d : t.shape()) put_u64(out, static_cast<std::uint64_t>(d));
    for (double v : t.data()) put_f64(out, v);
  }
}

ParamStore deserialize_store(Reader& reader) {
  ParamStore store;
  const std::uint32_t count = reader.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = reader.u32();
    const std::string name = reader.bytes(name_len);
    const std::uint32_t rank = reader.u32();
    Shape shape;
    for (std::uint32_t d = 0; d < rank; ++d) {
      shape.push_back(static_cast<std::int64_t>(reader.u64()));
    }
    std::vector<double> values(static_cast<size_t>(shape_numel(shape)));
    for (double& v : values) v = reader.f64();
    store.add(name, Tensor::from(std::move(shape), std::move(values)));
  }
  return store;
}

void atomic_write(const std::filesystem::path& path, const std::string& blob, bool binary) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, binary ? std::ios::binary : std::ios::out);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!out) throw DataError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

void save_checkpoint(const ParamStore& generator, const ParamStore& discriminator,
                     const std::string& config_text, const std::filesystem::path& path) {
  std::string blob = "GAWN";
  put_u16(blob, kCheckpointVersion);
  put_u32(blob, static_cast<std::uint32_t>(config_text.size()));
  blob += config_text;
  serialize_store(blob, generator);
  serialize_store(blob, discriminator);
  atomic_write(path, blob, true);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  Reader reader(blob, path.string());
  if (reader.bytes(4) != "GAWN") {
    throw DataError("corrupt checkpoint '" + path.string() + "': bad magic");
  }
  const std::uint16_t version = reader.u16();
  if (version != kCheckpointVersion) {
    throw DataError("checkpoint '" + path.string() + "' has unsupported version " +
                    std::to_string(version));
  }
  Checkpoint ckpt;
  const std::uint32_t cfg_len = reader.u32();
  ckpt.config_text = reader.bytes(cfg_len);
  ckpt.generator = deserialize_store(reader);
  ckpt.discriminator = deserialize_store(reader);
  if (!reader.done()) {
    throw DataError("corrupt checkpoint '" + path.string() + "': trailing bytes");
  }
  return ckpt;
}

void check_compatible(const ParamStore& loaded, const ParamStore& expected) {
  for (const auto& name : expected.names()) {
    if (!loaded.contains(name)) {
      throw StateError("checkpoint is missing parameter '" + name + "'");
    }
    if (loaded.at(name).shape() != expected.at(name).shape()) {
      throw StateError("checkpoint parameter '" + name + "' has shape " +
                       shape_str(loaded.at(name).shape()) + ", expected " +
                       shape_str(expected.at(name).shape()));
    }
  }
  for (const auto& name : loaded.names()) {
    if (!expected.contains(name)) {
      throw StateError("checkpoint has unexpected parameter '" + name + "'");
    }
  }
}

void save_train_log(const TrainLog& log, const std::filesystem::path& path) {
  std::string blob = "epoch,d_loss,g_loss,probe_error\n";
  char line[160];
  for (const EpochRecord& r : log.records) {
    std::snprintf(line, sizeof(line), "%d,%.17g,%.17g,%.17g\n", r.epoch, r.d_loss, r.g_loss,
                  r.probe_error);
    blob += line;
  }
  atomic_write(path, blob, false);
}

}  // namespace gawno
