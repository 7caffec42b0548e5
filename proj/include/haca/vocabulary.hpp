// Copyright 2026 The haca Authors. Apache 2.0 License.

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "haca/config.hpp"

namespace haca {

// Token <-> id bijection. Ids 0..3 are PAD, BOS, EOS and UNK; words follow
// in insertion order.
class Vocabulary {
 public:
  Vocabulary();

  int add(std::string_view token);  // existing id if already present
  std::optional<int> find(std::string_view token) const;
  const std::string& token(int id) const;
  std::size_t size() const { return tokens_.size(); }
  bool contains(int id) const { return id >= 0 && static_cast<std::size_t>(id) < tokens_.size(); }

  // Whitespace-tokenized caption -> ids terminated by EOS. Unknown words
  // throw unless `allow_unknown`, in which case they map to UNK.
  std::vector<int> encode(std::string_view caption, bool allow_unknown = false) const;
  // Surface text; special tokens are dropped.
  std::string decode(std::span<const int> ids) const;

  // One word per line; the line index plus 4 is the id.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

// True for ids that decoding may emit: EOS and every word.
bool is_generatable(int id);

}  // namespace haca
