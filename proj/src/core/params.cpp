// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/core/params.hpp"

#include <cmath>
#include <unordered_set>

namespace tgvfm {

std::uint64_t fnv1a(const std::string& s, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::mt19937_64 rng_for(std::uint64_t seed, const std::string& name) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(fnv1a(name)), static_cast<std::uint32_t>(fnv1a(name) >> 32)};
  return std::mt19937_64(seq);
}

namespace init {

Tensor zeros(Shape shape) { return Tensor::zeros(std::move(shape)); }

Tensor constant(Shape shape, double v) { return Tensor(std::move(shape), v); }

Tensor normal(Shape shape, double stddev, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& v : t.vec()) v = dist(rng);
  return t;
}

Tensor xavier(Shape shape, int fan_in, int fan_out, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  const double b = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-b, b);
  for (auto& v : t.vec()) v = dist(rng);
  return t;
}

Tensor he(Shape shape, int fan_in, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  const double b = std::sqrt(6.0 / fan_in);
  std::uniform_real_distribution<double> dist(-b, b);
  for (auto& v : t.vec()) v = dist(rng);
  return t;
}

}  // namespace init

Var ParamStore::add(const std::string& name, Tensor value) {
  if (contains(name)) throw ContractError("duplicate parameter name '" + name + "'");
  Var v = Var::parameter(std::move(value));
  entries_.emplace_back(name, v);
  return v;
}

Var ParamStore::alias(const std::string& name, const Var& existing) {
  if (contains(name)) throw ContractError("duplicate parameter name '" + name + "'");
  entries_.emplace_back(name, existing);
  return existing;
}

bool ParamStore::contains(const std::string& name) const {
  for (const auto& [n, v] : entries_)
    if (n == name) return true;
  return false;
}

Var ParamStore::get(const std::string& name) const {
  for (const auto& [n, v] : entries_)
    if (n == name) return v;
  throw ContractError("unknown parameter '" + name + "'");
}

std::vector<std::pair<std::string, Var>> ParamStore::unique() const {
  std::vector<std::pair<std::string, Var>> out;
  std::unordered_set<const Node*> seen;
  for (const auto& e : entries_) {
    if (seen.insert(e.second.node()).second) out.push_back(e);
  }
  return out;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, v] : unique()) n += v.numel();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [n, v] : entries_) v.zero_grad();
}

void ParamStore::append(const ParamStore& other) {
  for (const auto& [n, v] : other.entries_) {
    if (contains(n)) throw ContractError("duplicate parameter name '" + n + "'");
    entries_.emplace_back(n, v);
  }
}

}  // namespace tgvfm
