// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <deque>

#include "tgvfm/core/tensor.hpp"

namespace tgvfm::tcfb {

/// One stored timestep: the block input f and the guidance source F.
struct BankEntry {
  Tensor shallow;  ///< [N, C] token map
  Tensor deep;     ///< guidance source, e.g. [C_dec, h, w]
};

/// Sliding window of the last k entries, most recent first.
class MemoryBank {
 public:
  /// Throws ConfigError for k < 1.
  explicit MemoryBank(int k);

  /// New entry goes to the front; the oldest is evicted beyond k. The first
  /// push fixes the shapes; later drift throws ContractError.
  void push(Tensor shallow, Tensor deep);
  void clear();

  int capacity() const { return k_; }
  int size() const { return static_cast<int>(entries_.size()); }
  bool empty() const { return entries_.empty(); }
  /// 0 = most recent (t-1).
  const BankEntry& at(int i) const { return entries_.at(static_cast<std::size_t>(i)); }

 private:
  int k_;
  std::deque<BankEntry> entries_;
  Shape shallow_shape_;
  Shape deep_shape_;
};

}  // namespace tgvfm::tcfb
