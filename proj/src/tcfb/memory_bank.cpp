// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/tcfb/memory_bank.hpp"

#include "tgvfm/core/errors.hpp"

namespace tgvfm::tcfb {

MemoryBank::MemoryBank(int k) : k_(k) {
  if (k < 1) throw ConfigError("memory bank window k must be >= 1");
}

void MemoryBank::push(Tensor shallow, Tensor deep) {
  if (shallow_shape_.empty()) {
    shallow_shape_ = shallow.shape();
    deep_shape_ = deep.shape();
  } else if (shallow.shape() != shallow_shape_ || deep.shape() != deep_shape_) {
    throw ContractError("memory bank shape drift: expected " + shape_str(shallow_shape_) + "/" +
                        shape_str(deep_shape_) + ", got " + shape_str(shallow.shape()) + "/" +
                        shape_str(deep.shape()));
  }
  entries_.push_front({std::move(shallow), std::move(deep)});
  if (static_cast<int>(entries_.size()) > k_) entries_.pop_back();
}

void MemoryBank::clear() {
  entries_.clear();
  shallow_shape_.clear();
  deep_shape_.clear();
}

}  // namespace tgvfm::tcfb
