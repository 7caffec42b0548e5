// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/dataset.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace haca {

namespace fs = std::filesystem;

namespace {

std::ifstream open_input(const fs::path& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open " + what);
  return in;
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> words;
  std::istringstream in(line);
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::size_t parse_count(const std::string& text, const std::string& where) {
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (errno || end == text.c_str() || *end || text[0] == '-') throw DataError(where + ": bad count '" + text + "'");
  return static_cast<std::size_t>(v);
}

}  // namespace

ModalityStream read_features(const fs::path& path, const std::string& modality) {
  auto in = open_input(path, "feature file");
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ":1: missing 'n d' header");
  auto header = split(line);
  const std::string head_where = path.string() + ":1";
  if (header.size() != 2) throw DataError(head_where + ": expected 'n d' header");
  const std::size_t n = parse_count(header[0], head_where), d = parse_count(header[1], head_where);
  if (n == 0 || d == 0) throw DataError(head_where + ": n and d must be positive");
  std::vector<double> values;
  values.reserve(n * d);
  for (std::size_t row = 0; row < n; ++row) {
    const std::string where = path.string() + ":" + std::to_string(row + 2);
    if (!std::getline(in, line)) throw DataError(where + ": expected " + std::to_string(n) + " rows, found " +
                                                 std::to_string(row));
    std::size_t count = 0;
    const char* p = line.c_str();
    while (true) {
      while (*p == ' ' || *p == '\t' || *p == '\r') ++p;
      if (!*p) break;
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(p, &end);
      if (end == p || (errno == ERANGE && !(std::abs(v) < 1.0))) throw DataError(where + ": bad value near '" + std::string(p).substr(0, 12) + "'");
      values.push_back(v);
      ++count;
      p = end;
    }
    if (count != d) {
      throw DataError(where + ": row " + std::to_string(row + 1) + " has " + std::to_string(count) +
                      " values, header dim is " + std::to_string(d));
    }
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw DataError(path.string() + ": more than " + std::to_string(n) + " rows");
    }
  }
  return ModalityStream(modality, n, d, std::move(values));
}

void write_features(const fs::path& path, const ModalityStream& stream) {
  auto out = open_output(path);
  out << stream.length << ' ' << stream.dim << '\n';
  for (std::size_t r = 0; r < stream.length; ++r) {
    for (std::size_t c = 0; c < stream.dim; ++c) {
      if (c) out << ' ';
      out << format_double(stream.values[r * stream.dim + c]);
    }
    out << '\n';
  }
  if (!out) throw DataError(path.string() + ": write failed");
}

std::vector<std::vector<int>> read_captions(const fs::path& path, const Vocabulary& vocab) {
  auto in = open_input(path, "caption file");
  std::vector<std::vector<int>> captions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      captions.push_back(vocab.encode(line));
    } catch (const std::invalid_argument& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (captions.empty()) throw DataError(path.string() + ": no captions");
  return captions;
}

void write_captions(const fs::path& path, const std::vector<std::vector<int>>& captions, const Vocabulary& vocab) {
  auto out = open_output(path);
  for (const auto& c : captions) out << vocab.decode(c) << '\n';
  if (!out) throw DataError(path.string() + ": write failed");
}

Dataset load_dataset(const fs::path& manifest) {
  auto in = open_input(manifest, "manifest");
  const fs::path base = manifest.parent_path();
  Dataset data;
  bool have_vocab = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = manifest.string() + ":" + std::to_string(line_no);
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    auto words = split(line);
    if (words.empty()) continue;
    if (words[0] == "vocab") {
      if (words.size() != 2) throw DataError(where + ": expected 'vocab <path>'");
      if (have_vocab) throw DataError(where + ": duplicate vocab line");
      data.vocab = Vocabulary::load(base / words[1]);
      have_vocab = true;
    } else if (words[0] == "sample") {
      if (!have_vocab) throw DataError(where + ": sample listed before the vocab line");
      if (words.size() < 3) throw DataError(where + ": expected 'sample <id> captions=<path> <modality>=<path>...'");
      Sample s;
      s.id = words[1];
      for (std::size_t i = 2; i < words.size(); ++i) {
        const auto eq = words[i].find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == words[i].size()) {
          throw DataError(where + ": expected key=path, got '" + words[i] + "'");
        }
        const std::string key = words[i].substr(0, eq);
        const fs::path file = base / words[i].substr(eq + 1);
        if (key == "captions") {
          if (!s.references.empty()) throw DataError(where + ": duplicate captions entry");
          s.references = read_captions(file, data.vocab);
        } else {
          if (s.find_stream(key)) throw DataError(where + ": duplicate '" + key + "' stream");
          s.streams.push_back(read_features(file, key));
        }
      }
      if (s.references.empty()) throw DataError(where + ": sample '" + s.id + "' has no captions entry");
      data.samples.push_back(std::move(s));
    } else {
      throw DataError(where + ": unknown directive '" + words[0] + "'");
    }
  }
  if (!have_vocab) throw DataError(manifest.string() + ": missing vocab line");
  return data;
}

void save_dataset(const fs::path& dir, const std::string& manifest_name, const Dataset& dataset,
                  const std::string& vocab_file) {
  fs::create_directories(dir);
  dataset.vocab.save(dir / vocab_file);
  auto out = open_output(dir / manifest_name);
  out << "vocab " << vocab_file << '\n';
  for (const auto& s : dataset.samples) {
    if (s.id.empty() || s.id.find_first_of(" \t/=") != std::string::npos) {
      throw DataError("sample id '" + s.id + "' is not usable as a file name");
    }
    const std::string captions = "captions/" + s.id + ".txt";
    write_captions(dir / captions, s.references, dataset.vocab);
    out << "sample " << s.id << " captions=" << captions;
    for (const auto& stream : s.streams) {
      const std::string features = "features/" + s.id + "." + stream.name + ".txt";
      write_features(dir / features, stream);
      out << ' ' << stream.name << '=' << features;
    }
    out << '\n';
  }
  if (!out) throw DataError((dir / manifest_name).string() + ": write failed");
}

}  // namespace haca
