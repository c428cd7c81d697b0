// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "tgvfm/core/autograd.hpp"

namespace tgvfm {

/// Stable 64-bit FNV-1a; used to derive per-parameter seeds from names.
std::uint64_t fnv1a(const std::string& s, std::uint64_t basis = 1469598103934665603ULL);

/// Generator seeded from (seed, name) so that a parameter's initial value
/// depends only on its own name, not on which other modules exist.
std::mt19937_64 rng_for(std::uint64_t seed, const std::string& name);

namespace init {
Tensor zeros(Shape shape);
Tensor constant(Shape shape, double v);
Tensor normal(Shape shape, double stddev, std::mt19937_64& rng);
/// Uniform(-b, b) with b = sqrt(6 / (fan_in + fan_out)).
Tensor xavier(Shape shape, int fan_in, int fan_out, std::mt19937_64& rng);
/// Uniform(-b, b) with b = sqrt(6 / fan_in) (He-uniform, for ReLU stacks).
Tensor he(Shape shape, int fan_in, std::mt19937_64& rng);
}  // namespace init

/// Ordered registry of named learnable tensors. Entries may alias the same
/// node (shared parameters); counts and optimizer updates dedupe by node.
class ParamStore {
 public:
  Var add(const std::string& name, Tensor value);
  /// Registers `existing` under another name without copying it.
  Var alias(const std::string& name, const Var& existing);

  bool contains(const std::string& name) const;
  Var get(const std::string& name) const;

  const std::vector<std::pair<std::string, Var>>& entries() const { return entries_; }
  /// One representative (first name) per distinct node.
  std::vector<std::pair<std::string, Var>> unique() const;
  std::size_t scalar_count() const;

  void zero_grad();
  void append(const ParamStore& other);

 private:
  std::vector<std::pair<std::string, Var>> entries_;
};

}  // namespace tgvfm
