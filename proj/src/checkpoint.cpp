// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace haca {

namespace fs = std::filesystem;

namespace {

constexpr char kMagic[4] = {'H', 'A', 'C', 'A'};

std::uint64_t fnv1a(const std::uint8_t* data, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= data[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    auto b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str32(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t>& data() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size, std::size_t base) : data_(data), size_(size), base_(base) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw CheckpointError("checkpoint: offset " + std::to_string(base_ + pos_) + ": " + what);
  }
  void need(std::size_t n, const char* what) const {
    if (size_ - pos_ < n) fail(std::string("truncated ") + what);
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return data_[pos_++];
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{data_[pos_++]} << (8 * i);
    return v;
  }
  std::uint64_t u64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{data_[pos_++]} << (8 * i);
    return v;
  }
  double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
  std::string bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == size_; }

 private:
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

std::string encode_array(const NamedArray& a) {
  std::size_t expected = 1;
  for (auto d : a.shape) expected *= d;
  if (expected != a.values.size()) {
    throw CheckpointError("checkpoint: array '" + a.name + "' shape does not match its " +
                          std::to_string(a.values.size()) + " values");
  }
  Writer w;
  w.u32(static_cast<std::uint32_t>(a.shape.size()));
  for (auto d : a.shape) w.u64(d);
  for (double v : a.values) w.f64(v);
  return std::string(w.data().begin(), w.data().end());
}

NamedArray decode_array(std::string name, const std::string& payload, std::size_t offset) {
  Reader r(reinterpret_cast<const std::uint8_t*>(payload.data()), payload.size(), offset);
  NamedArray a;
  a.name = std::move(name);
  const std::uint32_t rank = r.u32("array rank");
  std::size_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    a.shape.push_back(r.u64("array shape"));
    count *= a.shape.back();
  }
  if (count != (payload.size() - r.pos()) / 8 || (payload.size() - r.pos()) % 8) {
    r.fail("array '" + a.name + "' payload does not match its shape");
  }
  a.values.resize(count);
  for (auto& v : a.values) v = r.f64("array values");
  return a;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c) {
  std::vector<std::pair<std::string, std::string>> sections;
  sections.emplace_back("config", format_config_text(c.config));
  sections.emplace_back("train_state", format_config_text(c.train_state));
  sections.emplace_back("rng", c.rng_state);
  for (const auto& a : c.parameters) sections.emplace_back("param/" + a.name, encode_array(a));
  for (const auto& a : c.optimizer) sections.emplace_back("optim/" + a.name, encode_array(a));

  Writer w;
  w.bytes(kMagic, 4);
  w.u8(Checkpoint::kVersion);
  w.u32(static_cast<std::uint32_t>(sections.size()));
  for (const auto& [name, payload] : sections) {
    w.str32(name);
    w.u64(payload.size());
    w.bytes(payload.data(), payload.size());
  }
  w.u64(fnv1a(w.data().data(), w.data().size()));
  return std::move(w.data());
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 + 1 + 4 + 8) throw CheckpointError("checkpoint: offset 0: file too short");
  Reader r(bytes.data(), bytes.size() - 8, 0);
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) r.fail("bad magic (not a checkpoint)");
  r.bytes(4, "magic");
  const std::uint8_t version = r.u8("version");
  if (version != Checkpoint::kVersion) {
    r.fail("unsupported version " + std::to_string(version) + " (expected " + std::to_string(Checkpoint::kVersion) +
           ")");
  }
  Checkpoint c;
  const std::uint32_t count = r.u32("section count");
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t name_len = r.u32("section name length");
    std::string name = r.bytes(name_len, "section name");
    const std::uint64_t len = r.u64("section length");
    const std::size_t payload_offset = r.pos();
    std::string payload = r.bytes(len, "section payload");
    try {
      if (name == "config") {
        c.config = parse_config_text(payload, "checkpoint config");
      } else if (name == "train_state") {
        c.train_state = parse_config_text(payload, "checkpoint train_state");
      } else if (name == "rng") {
        c.rng_state = std::move(payload);
      } else if (name.starts_with("param/")) {
        c.parameters.push_back(decode_array(name.substr(6), payload, payload_offset));
      } else if (name.starts_with("optim/")) {
        c.optimizer.push_back(decode_array(name.substr(6), payload, payload_offset));
      } else {
        throw CheckpointError("checkpoint: offset " + std::to_string(payload_offset) + ": unknown section '" + name +
                              "'");
      }
    } catch (const ConfigError& e) {
      throw CheckpointError("checkpoint: offset " + std::to_string(payload_offset) + ": " + e.what());
    }
  }
  if (!r.done()) r.fail("trailing bytes after the last section");
  std::uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) stored |= std::uint64_t{bytes[bytes.size() - 8 + i]} << (8 * i);
  if (stored != fnv1a(bytes.data(), bytes.size() - 8)) {
    throw CheckpointError("checkpoint: offset " + std::to_string(bytes.size() - 8) + ": checksum mismatch");
  }
  return c;
}

void save_checkpoint(const fs::path& path, const Checkpoint& checkpoint) {
  const auto bytes = encode_checkpoint(checkpoint);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError(tmp.string() + ": cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw CheckpointError(tmp.string() + ": write failed");
  }
  fs::rename(tmp, path);
}

Checkpoint load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(path.string() + ": cannot open checkpoint");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_checkpoint(bytes);
  } catch (const CheckpointError& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
}

}  // namespace haca
