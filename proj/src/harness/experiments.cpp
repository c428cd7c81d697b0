// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/harness/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>

#include "tgvfm/core/errors.hpp"

namespace tgvfm::harness {

namespace fs = std::filesystem;

namespace {

void progress(const ExperimentOptions& o, const std::string& msg) {
  if (o.on_progress) o.on_progress(msg);
}

std::string seed_dir(const std::string& out_dir, const std::string& name, std::uint64_t seed) {
  return (fs::path(out_dir) / (name + "-s" + std::to_string(seed))).string();
}

double mean_miou(const std::vector<RunRecord>& runs) {
  double s = 0.0;
  for (const auto& r : runs) s += r.final_metrics.at("eval.miou");
  return runs.empty() ? 0.0 : s / static_cast<double>(runs.size());
}

// Per-frame latency of each model. Models are interleaved per sequence, with
// a rotating start, so slow periods of the host land on every model alike.
std::vector<double> interleaved_latency_ms(const std::vector<backbone::TGVFM>& models,
                                           const std::vector<Sequence>& sequences, int rounds) {
  NoGradGuard no_grad;
  std::vector<std::vector<double>> samples(models.size());
  std::size_t frames = 0;
  for (const auto& seq : sequences) frames += seq.input.size();
  for (int r = 0; r < std::max(1, rounds); ++r) {
    std::vector<double> total(models.size(), 0.0);
    for (std::size_t s = 0; s < sequences.size(); ++s) {
      for (std::size_t j = 0; j < models.size(); ++j) {
        const std::size_t i = (j + s + static_cast<std::size_t>(r)) % models.size();
        auto banks = models[i].reset_banks();
        const auto t0 = std::chrono::steady_clock::now();
        for (const auto& f : sequences[s].input) models[i].forward_frame(f, banks);
        total[i] += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      }
    }
    for (std::size_t i = 0; i < models.size(); ++i) {
      samples[i].push_back(total[i] / static_cast<double>(std::max<std::size_t>(frames, 1)));
    }
  }
  std::vector<double> out;
  for (auto& s : samples) {
    std::sort(s.begin(), s.end());
    out.push_back(s[s.size() / 2]);
  }
  return out;
}

}  // namespace

RunRecord run_or_reuse(const RunConfig& config, const Dataset& data, const std::string& run_dir,
                       const ExperimentOptions& options) {
  const RunPaths paths{run_dir};
  if (options.reuse) {
    // The run itself, or a sibling run of an identical config (e.g. the
    // sweep's default k and the ablation's full row).
    std::vector<fs::path> candidates{run_dir};
    const fs::path parent = fs::path(run_dir).parent_path();
    if (fs::is_directory(parent)) {
      std::vector<fs::path> siblings;
      for (const auto& e : fs::directory_iterator(parent)) {
        if (e.is_directory() && e.path() != fs::path(run_dir)) siblings.push_back(e.path());
      }
      std::sort(siblings.begin(), siblings.end());
      candidates.insert(candidates.end(), siblings.begin(), siblings.end());
    }
    const std::string text = to_text(config);
    for (const auto& dir : candidates) {
      const RunPaths p{dir.string()};
      if (!fs::exists(p.record())) continue;
      RunRecord r = load_record(p.record());
      if (r.finalized && r.config_text == text && fs::exists(p.model())) {
        progress(options, "reusing " + p.dir);
        return r;
      }
    }
  }
  progress(options, "training " + run_dir);
  RunOptions ro;
  ro.resume = options.reuse;
  return run_training(config, data, run_dir, ro);
}

std::string pretrain(const RunConfig& base, const Dataset& data, const std::string& out_dir, std::uint64_t seed,
                     const ExperimentOptions& options) {
  if (options.pretrain_iterations <= 0 || !base.init_checkpoint.empty()) return base.init_checkpoint;
  RunConfig c = base;
  c.seed = seed;
  c.backbone.n_tcfb_sites = 0;
  c.tcfb.insertion_sites.clear();
  c.train.iterations = options.pretrain_iterations;
  c.optim.lr = options.pretrain_lr;
  const std::string dir = seed_dir(out_dir, "pretrain", seed);
  run_or_reuse(c, data, dir, options);
  return RunPaths{dir}.model();
}

std::vector<AblationRow> ablation_rows() {
  return {
      {"baseline", false, false, false, false}, {"none", true, false, false, false}, {"L", true, true, false, false},
      {"L+G", true, true, false, true},         {"D", true, false, true, false},     {"D+G", true, false, true, true},
      {"L+D", true, true, true, false},         {"L+D+G", true, true, true, true},
  };
}

RunConfig apply_row(const RunConfig& base, const AblationRow& row) {
  RunConfig c = base;
  if (!row.tcfb) {
    c.backbone.n_tcfb_sites = 0;
    c.tcfb.insertion_sites.clear();
    return c;
  }
  if (c.backbone.n_tcfb_sites == 0) throw ConfigError("ablation needs backbone.n_tcfb_sites > 0 in the base config");
  c.tcfb.use_lta = row.lta;
  c.tcfb.use_dsa = row.dsa;
  c.tcfb.use_dfgm = row.dfgm;
  return c;
}

std::vector<AblationEntry> run_ablation(const RunConfig& base, const Dataset& data, const std::string& out_dir,
                                        const ExperimentOptions& options) {
  if (base.task != Task::Seg) throw ConfigError("the ablation reports MIoU and needs task = seg");
  std::vector<AblationEntry> table;
  for (const auto& row : ablation_rows()) table.push_back({row, {}, 0.0, 0.0});
  for (std::uint64_t seed : options.seeds) {
    RunConfig seeded = base;
    seeded.seed = seed;
    seeded.init_checkpoint = pretrain(seeded, data, out_dir, seed, options);
    for (auto& e : table) {
      e.runs.push_back(run_or_reuse(apply_row(seeded, e.row), data, seed_dir(out_dir, e.row.name, seed), options));
    }
  }
  for (auto& e : table) e.miou = mean_miou(e.runs);
  for (auto& e : table) e.improvement = e.miou - table.front().miou;
  return table;
}

std::vector<SweepEntry> sweep_memory_k(const RunConfig& base, const std::vector<int>& k_values, const Dataset& data,
                                       const std::string& out_dir, const ExperimentOptions& options,
                                       int latency_rounds) {
  if (k_values.empty()) throw ConfigError("sweep-k needs at least one k");
  if (base.task != Task::Seg) throw ConfigError("the memory sweep reports MIoU and needs task = seg");
  if (base.backbone.n_tcfb_sites == 0) throw ConfigError("sweep-k needs backbone.n_tcfb_sites > 0");
  std::vector<SweepEntry> table;
  for (int k : k_values) table.push_back({k, {}, 0.0, 0.0});
  for (std::uint64_t seed : options.seeds) {
    RunConfig seeded = base;
    seeded.seed = seed;
    seeded.init_checkpoint = pretrain(seeded, data, out_dir, seed, options);
    for (auto& e : table) {
      RunConfig c = seeded;
      c.tcfb.k = e.k;
      e.runs.push_back(run_or_reuse(c, data, seed_dir(out_dir, "k" + std::to_string(e.k), seed), options));
    }
  }
  std::vector<backbone::TGVFM> models;
  for (const auto& e : table) models.push_back(backbone::TGVFM::load(e.runs.front().artifacts.at("model")));
  progress(options, "measuring latency");
  const auto latency = interleaved_latency_ms(models, data.eval, latency_rounds);
  for (std::size_t i = 0; i < table.size(); ++i) {
    table[i].latency_ms = latency[i];
    table[i].miou = mean_miou(table[i].runs);
  }
  return table;
}

}  // namespace tgvfm::harness
