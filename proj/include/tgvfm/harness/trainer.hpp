// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <map>
#include <string>

#include "tgvfm/backbone/backbone.hpp"
#include "tgvfm/harness/config.hpp"
#include "tgvfm/harness/dataset.hpp"
#include "tgvfm/harness/run_record.hpp"

namespace tgvfm::harness {

/// Held-out evaluation. Every sequence starts from empty banks and runs all
/// steps in order. Seg reports "eval.miou" and "eval.iou.<class>" in percent;
/// depth reports "eval.delta1..3", "eval.rel", "eval.rms", "eval.rms_log".
/// With a teacher, "eval.distill_loss" and (seg) "eval.disagreement" are added.
std::map<std::string, double> evaluate(const backbone::TGVFM& model, const std::vector<Sequence>& sequences,
                                       Task task, const backbone::TGVFM* teacher = nullptr);

/// Mean per-frame inference time in milliseconds over `sequences`, taking the
/// median of `repeats` passes.
double measure_latency_ms(const backbone::TGVFM& model, const std::vector<Sequence>& sequences, int repeats = 3);

/// Copies tensors with matching names from a TGV1 checkpoint. Every non-TCFB
/// parameter must be present; TCFB tensors keep their initial values when absent.
void init_from_checkpoint(backbone::TGVFM& model, const std::string& path);

struct RunOptions {
  /// Continue from checkpoints/state.tgvs when present.
  bool resume = true;
  /// Stops (unfinalized) once this many iterations have completed; emulates a
  /// killed run. Negative disables.
  int halt_after = -1;
  /// Progress callback (iteration, loss).
  std::function<void(long long, double)> on_log;
};

/// Trains per config.mode on a prepared dataset and persists everything under
/// `run_dir`. Returns the record; it is finalized unless halted.
RunRecord run_training(const RunConfig& config, const Dataset& data, const std::string& run_dir,
                       const RunOptions& options = {});

/// Mode-checked entry points over run_training.
RunRecord train_supervised(const RunConfig& config, const Dataset& data, const std::string& run_dir,
                           const RunOptions& options = {});
RunRecord train_distilled(const RunConfig& config, const Dataset& data, const std::string& run_dir,
                          const RunOptions& options = {});

}  // namespace tgvfm::harness
