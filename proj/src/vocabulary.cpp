// Copyright 2026 The haca Authors. Apache 2.0 License.

#include "haca/vocabulary.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "haca/dataset.hpp"

namespace haca {

Vocabulary::Vocabulary() {
  for (const char* t : {"<pad>", "<bos>", "<eos>", "<unk>"}) add(t);
}

int Vocabulary::add(std::string_view token) {
  if (auto id = find(token)) return *id;
  if (token.empty() || token.find_first_of(" \t\r\n") != std::string_view::npos) {
    throw std::invalid_argument("vocabulary: invalid token '" + std::string(token) + "'");
  }
  const int id = static_cast<int>(tokens_.size());
  tokens_.emplace_back(token);
  ids_.emplace(tokens_.back(), id);
  return id;
}

std::optional<int> Vocabulary::find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (!contains(id)) throw std::out_of_range("vocabulary: id " + std::to_string(id) + " out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

std::vector<int> Vocabulary::encode(std::string_view caption, bool allow_unknown) const {
  std::vector<int> ids;
  std::istringstream in{std::string(caption)};
  std::string word;
  while (in >> word) {
    auto id = find(word);
    if (!id || *id < kReservedTokens) {
      if (!allow_unknown) throw std::invalid_argument("unknown token '" + word + "'");
      id = kUnk;
    }
    ids.push_back(*id);
  }
  ids.push_back(kEos);
  return ids;
}

std::string Vocabulary::decode(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (id < kReservedTokens && id != kUnk) continue;
    if (!out.empty()) out += ' ';
    out += token(id);
  }
  return out;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  for (std::size_t i = kReservedTokens; i < tokens_.size(); ++i) out << tokens_[i] << '\n';
  if (!out) throw DataError(path.string() + ": write failed");
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open vocabulary");
  Vocabulary v;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (line.empty() || line.find_first_of(" \t") != std::string::npos) {
      throw DataError(where + ": expected one token per line");
    }
    if (v.find(line)) throw DataError(where + ": duplicate token '" + line + "'");
    v.add(line);
  }
  return v;
}

bool is_generatable(int id) { return id == kEos || id >= kReservedTokens; }

}  // namespace haca
