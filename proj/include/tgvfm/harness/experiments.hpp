// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tgvfm/harness/trainer.hpp"

namespace tgvfm::harness {

struct ExperimentOptions {
  std::vector<std::uint64_t> seeds{0};
  /// When > 0 and the base config has no init_checkpoint, a TCFB-free model is
  /// first trained for this many iterations per seed and every row starts from it.
  int pretrain_iterations = 0;
  double pretrain_lr = 1e-3;
  /// Reuse finalized runs whose stored config matches.
  bool reuse = true;
  std::function<void(const std::string&)> on_progress;
};

/// Trains (or reuses) the TCFB-free initialisation for one seed and returns
/// the checkpoint path; empty when pretraining is disabled.
std::string pretrain(const RunConfig& base, const Dataset& data, const std::string& out_dir, std::uint64_t seed,
                     const ExperimentOptions& options);

/// Runs a config in `run_dir`, or returns the finalized record already there
/// when it was produced by the same config.
RunRecord run_or_reuse(const RunConfig& config, const Dataset& data, const std::string& run_dir,
                       const ExperimentOptions& options);

struct AblationRow {
  std::string name;  ///< "baseline", "none", "L", "L+G", "D", "D+G", "L+D", "L+D+G"
  bool tcfb = true;
  bool lta = false;
  bool dsa = false;
  bool dfgm = false;
};

/// The TCFB-free baseline followed by the seven component combinations.
std::vector<AblationRow> ablation_rows();
RunConfig apply_row(const RunConfig& base, const AblationRow& row);

struct AblationEntry {
  AblationRow row;
  std::vector<RunRecord> runs;  ///< one per seed
  double miou = 0.0;            ///< seed mean, percent
  double improvement = 0.0;     ///< miou - baseline miou
};

std::vector<AblationEntry> run_ablation(const RunConfig& base, const Dataset& data, const std::string& out_dir,
                                        const ExperimentOptions& options);

struct SweepEntry {
  int k = 0;
  std::vector<RunRecord> runs;
  double miou = 0.0;
  double latency_ms = 0.0;
};

/// Full TCFB with each memory window in `k_values`; latency is measured after
/// all runs finished, interleaving the models per sequence over `latency_rounds`
/// rounds and taking the median round.
std::vector<SweepEntry> sweep_memory_k(const RunConfig& base, const std::vector<int>& k_values, const Dataset& data,
                                       const std::string& out_dir, const ExperimentOptions& options,
                                       int latency_rounds = 5);

}  // namespace tgvfm::harness
