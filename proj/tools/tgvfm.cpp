// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end. Every flag can also be given through an environment
// variable TGVFM_<FLAG> (dashes become underscores), e.g. TGVFM_OUT_DIR.

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "tgvfm/core/errors.hpp"
#include "tgvfm/e2vid/train.hpp"
#include "tgvfm/events/event_io.hpp"
#include "tgvfm/events/scene_io.hpp"
#include "tgvfm/events/simulator.hpp"
#include "tgvfm/harness/experiments.hpp"
#include "tgvfm/harness/report.hpp"

namespace fs = std::filesystem;
using namespace tgvfm;
using namespace tgvfm::harness;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "runs/default";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "Run config file (key = value)");
  app->add_option("--set", c.sets, "Config override key=value (repeatable)");
  app->add_option("--seed", c.seed, "Seed override");
  app->add_option("--out-dir", c.out_dir, "Output directory");
}

void bind_env(CLI::App* app) {
  for (CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    std::string env = "TGVFM_";
    for (char ch : name) env += ch == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    opt->envname(env);
  }
  for (CLI::App* sub : app->get_subcommands({})) bind_env(sub);
}

RunConfig resolve(const Common& c) {
  RunConfig base = c.config.empty() ? RunConfig{} : load_config(c.config);
  KeyValues overrides;
  for (const auto& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
    overrides.set(s.substr(0, eq), s.substr(eq + 1));
  }
  if (c.seed) overrides.set("seed", std::to_string(*c.seed));
  return with_overrides(base, overrides);
}

void print_metrics(const RunRecord& r) {
  std::printf("%s:", r.name.c_str());
  for (const auto& [k, v] : r.final_metrics) std::printf(" %s=%.4f", k.c_str(), v);
  std::printf("\n");
}

ExperimentOptions experiment_options(const std::vector<std::uint64_t>& seeds, int pretrain_iters, double pretrain_lr) {
  ExperimentOptions o;
  o.seeds = seeds;
  o.pretrain_iterations = pretrain_iters;
  o.pretrain_lr = pretrain_lr;
  o.on_progress = [](const std::string& s) { std::fprintf(stderr, "%s\n", s.c_str()); };
  return o;
}

std::vector<RunRecord> collect_records(const std::vector<std::string>& roots) {
  std::vector<std::string> paths;
  for (const auto& root : roots) {
    if (fs::is_regular_file(root)) {
      paths.push_back(root);
      continue;
    }
    if (!fs::exists(root)) throw IoError("run directory " + root + " not found");
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (e.is_regular_file() && e.path().filename() == "record.json") paths.push_back(e.path().string());
    }
  }
  std::sort(paths.begin(), paths.end());
  std::vector<RunRecord> out;
  for (const auto& p : paths) out.push_back(load_record(p));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TGVFM-lite: event simulation, E2VID reconstruction and temporal fusion experiments"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Generate synthetic scenes with their event streams");
  std::string sim_out = "data/scenes";
  int sim_count = 8;
  std::uint64_t sim_seed = 1;
  double sim_threshold = events::kDefaultContrastThreshold;
  bool sim_text = false;
  sim->add_option("--out-dir", sim_out, "Destination directory");
  sim->add_option("--count", sim_count, "Number of scenes")->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "Scene seed");
  sim->add_option("--contrast-threshold", sim_threshold, "Log-intensity contrast threshold");
  sim->add_flag("--text", sim_text, "Write events as text instead of binary");

  // e2vid-train / e2vid-eval
  auto* etrain = app.add_subcommand("e2vid-train", "Train an E2VID reconstruction network");
  e2vid::TrainOptions eopts;
  eopts.lr = 1e-3;
  eopts.crop = 32;
  std::string e_preset = "B0", e_source = "synthetic:7", e_out = "models/e2vid_b0.e2v";
  etrain->add_option("--preset", e_preset, "B0..B4");
  etrain->add_option("--source", e_source, "synthetic[:seed] or a directory of scene archives");
  etrain->add_option("--out", e_out, "Checkpoint path");
  etrain->add_option("--iterations", eopts.iterations);
  etrain->add_option("--batch", eopts.batch);
  etrain->add_option("--unroll", eopts.unroll);
  etrain->add_option("--lr", eopts.lr);
  etrain->add_option("--crop", eopts.crop, "Random square crop size, 0 for full frames");
  etrain->add_option("--seed", eopts.seed);
  etrain->add_option("--log-every", eopts.log_every);

  auto* eeval = app.add_subcommand("e2vid-eval", "Held-out SSIM of an E2VID checkpoint");
  std::string ee_ckpt = "models/e2vid_b0.e2v", ee_source = "synthetic:7";
  std::uint64_t ee_first = 1000000;
  int ee_count = 16;
  eeval->add_option("--checkpoint", ee_ckpt);
  eeval->add_option("--source", ee_source);
  eeval->add_option("--first", ee_first, "First held-out scene index");
  eeval->add_option("--count", ee_count);

  // train / distill
  Common train_c, distill_c, ablate_c, sweep_c;
  int halt_after = -1;
  auto* train = app.add_subcommand("train", "Supervised training of backbone + TCFB");
  add_common(train, train_c);
  train->add_option("--halt-after", halt_after, "Stop after this many iterations (leaves a resumable run)");
  auto* distill = app.add_subcommand("distill", "Distilled training against a frozen teacher");
  add_common(distill, distill_c);

  // ablate / sweep-k
  std::vector<std::uint64_t> seeds{0};
  int pre_iters = 0;
  double pre_lr = 1e-3;
  auto* ablate = app.add_subcommand("ablate", "Baseline plus the seven LTA/DSA/DFGM combinations");
  add_common(ablate, ablate_c);
  ablate->add_option("--seeds", seeds, "Training seeds")->delimiter(',');
  ablate->add_option("--pretrain-iterations", pre_iters, "TCFB-free warm-up shared by all rows");
  ablate->add_option("--pretrain-lr", pre_lr);
  std::vector<int> k_values{1, 2, 3, 4, 5};
  auto* sweep = app.add_subcommand("sweep-k", "Memory window sweep with latency");
  add_common(sweep, sweep_c);
  sweep->add_option("--k", k_values, "Window sizes")->delimiter(',');
  sweep->add_option("--seeds", seeds, "Training seeds")->delimiter(',');
  sweep->add_option("--pretrain-iterations", pre_iters);
  sweep->add_option("--pretrain-lr", pre_lr);

  // report
  auto* report = app.add_subcommand("report", "Tables and loss curves from finalized runs");
  std::vector<std::string> report_runs;
  std::string report_out = "reports";
  report->add_option("--runs", report_runs, "Run directories or record.json files")->required();
  report->add_option("--out-dir", report_out);

  bind_env(&app);
  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      events::SceneConfig cfg;
      for (int i = 0; i < sim_count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "scene_%04d", i);
        const fs::path dir = fs::path(sim_out) / name;
        const auto scene = events::generate_scene(sim_seed * 1000003ULL + static_cast<std::uint64_t>(i), cfg);
        events::write_scene_archive(dir.string(), scene);
        const auto stream = events::simulate_events(scene, sim_threshold);
        if (sim_text) {
          events::write_events_text((dir / "events.txt").string(), stream);
        } else {
          events::write_events_binary((dir / "events.bin").string(), stream);
        }
        std::printf("%s: %zu events\n", dir.string().c_str(), stream.events.size());
      }
    } else if (etrain->parsed()) {
      e2vid::E2VIDModel model(e2vid::preset(e_preset), eopts.seed);
      const auto source = e2vid::open_scene_source(e_source, events::SceneConfig{});
      e2vid::train(model, *source, eopts, [](int it, double loss) { std::printf("iter %d loss %.5f\n", it, loss); });
      if (fs::path(e_out).has_parent_path()) fs::create_directories(fs::path(e_out).parent_path());
      model.save(e_out);
      std::printf("saved %s\n", e_out.c_str());
    } else if (eeval->parsed()) {
      const auto model = e2vid::E2VIDModel::load(ee_ckpt);
      const auto source = e2vid::open_scene_source(ee_source, events::SceneConfig{});
      const auto r = e2vid::evaluate(model, *source, ee_first, ee_count);
      std::printf("ssim=%.4f ssim_reset_state=%.4f sequences=%d frames=%d\n", r.ssim, r.ssim_reset_state, r.sequences,
                  r.frames);
    } else if (train->parsed()) {
      const RunConfig cfg = resolve(train_c);
      const Dataset data = build_dataset(cfg);
      RunOptions ro;
      ro.halt_after = halt_after;
      ro.on_log = [](long long it, double loss) { std::printf("iter %lld loss %.5f\n", it, loss); };
      const RunRecord r = train_supervised(cfg, data, train_c.out_dir, ro);
      if (r.finalized) print_metrics(r);
    } else if (distill->parsed()) {
      RunConfig cfg = resolve(distill_c);
      cfg.mode = Mode::Distilled;
      const Dataset data = build_dataset(cfg);
      RunOptions ro;
      ro.on_log = [](long long it, double loss) { std::printf("iter %lld loss %.5f\n", it, loss); };
      print_metrics(train_distilled(cfg, data, distill_c.out_dir, ro));
    } else if (ablate->parsed()) {
      const RunConfig cfg = resolve(ablate_c);
      const Dataset data = build_dataset(cfg);
      const auto table = run_ablation(cfg, data, ablate_c.out_dir, experiment_options(seeds, pre_iters, pre_lr));
      const std::string path = (fs::path(ablate_c.out_dir) / "ablation.tsv").string();
      write_ablation_table(table, path);
      std::printf("%-9s %7s %7s\n", "row", "MIoU", "Impro.");
      for (const auto& e : table) std::printf("%-9s %7.2f %+7.2f\n", e.row.name.c_str(), e.miou, e.improvement);
      std::printf("table: %s\n", path.c_str());
    } else if (sweep->parsed()) {
      const RunConfig cfg = resolve(sweep_c);
      const Dataset data = build_dataset(cfg);
      const auto table = sweep_memory_k(cfg, k_values, data, sweep_c.out_dir, experiment_options(seeds, pre_iters, pre_lr));
      const std::string path = (fs::path(sweep_c.out_dir) / "sweep_k.tsv").string();
      write_sweep_table(table, path);
      std::printf("%-3s %7s %9s\n", "k", "MIoU", "Infer_ms");
      for (const auto& e : table) std::printf("%-3d %7.2f %9.2f\n", e.k, e.miou, e.latency_ms);
      std::printf("table: %s\n", path.c_str());
    } else if (report->parsed()) {
      for (const auto& f : emit_report(collect_records(report_runs), report_out)) std::printf("%s\n", f.c_str());
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
