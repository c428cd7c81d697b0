// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

namespace tgvfm::harness {

/// One metrics.log line: {"iteration": i, "wall_ms": t, "<name>": value, ...}.
struct MetricRecord {
  long long iteration = 0;
  double wall_ms = 0.0;
  std::map<std::string, double> values;

  std::string to_json() const;
  static MetricRecord from_json(const std::string& line);
};

/// Appends and flushes one line.
void append_metric(const std::string& path, const MetricRecord& record);
/// Missing file reads as empty; a torn last line (killed writer) is dropped.
std::vector<MetricRecord> read_metrics(const std::string& path);
/// Rewrites the log keeping records with iteration < `iteration`.
void truncate_metrics(const std::string& path, long long iteration);

/// Run directory layout.
struct RunPaths {
  std::string dir;

  std::string config() const { return dir + "/config"; }
  std::string metrics() const { return dir + "/metrics.log"; }
  std::string record() const { return dir + "/record.json"; }
  std::string checkpoints() const { return dir + "/checkpoints"; }
  std::string state() const { return checkpoints() + "/state.tgvs"; }
  std::string model() const { return checkpoints() + "/model.tgv"; }
};

struct RunRecord {
  std::string name;
  std::string config_text;
  std::vector<MetricRecord> log;
  /// Final held-out metrics (names as in metrics.log).
  std::map<std::string, double> final_metrics;
  /// Non-deterministic measurements (wall-clock, latency).
  std::map<std::string, double> timing;
  std::map<std::string, std::string> artifacts;
  bool finalized = false;

  /// Losses logged at training intervals, by iteration.
  std::vector<std::pair<long long, double>> loss_curve(const std::string& key = "loss") const;
};

void save_record(const std::string& path, const RunRecord& record);
/// Throws IoError when missing or malformed.
RunRecord load_record(const std::string& path);

}  // namespace tgvfm::harness
