// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tgvfm/harness/experiments.hpp"
#include "tgvfm/harness/run_record.hpp"

namespace tgvfm::harness {

/// Writes `runs.tsv` (one row per record) and `<name>.loss.png` per record into
/// `report_dir`. Output is a pure function of the records. Throws
/// ContractError for an empty list or an unfinalized record.
std::vector<std::string> emit_report(const std::vector<RunRecord>& records, const std::string& report_dir);

/// Tab-separated ablation table: row, LTA, DSA, DFGM, MIoU, Impro., per-seed MIoU.
void write_ablation_table(const std::vector<AblationEntry>& table, const std::string& path);
/// Tab-separated sweep table: k, MIoU, latency.
void write_sweep_table(const std::vector<SweepEntry>& table, const std::string& path);

/// Grayscale line plot of (iteration, value) pairs with axes; 8-bit PNG.
void plot_curve(const std::vector<std::pair<long long, double>>& points, const std::string& path, int width = 320,
                int height = 200);

}  // namespace tgvfm::harness
