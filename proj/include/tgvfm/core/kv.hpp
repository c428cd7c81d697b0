// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

namespace tgvfm {

/// Ordered `key = value` text. '#' starts a comment; blank lines are skipped.
/// Dotted keys ("train.lr") express sections.
class KeyValues {
 public:
  /// Throws ConfigError on a line without '=' or a duplicate key.
  static KeyValues parse(const std::string& text);
  std::string to_text() const;

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;

  std::string str(const std::string& key, const std::string& fallback) const;
  long long integer(const std::string& key, long long fallback) const;
  double real(const std::string& key, double fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<int> int_list(const std::string& key, const std::vector<int>& fallback) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::string join_ints(const std::vector<int>& v);

}  // namespace tgvfm
