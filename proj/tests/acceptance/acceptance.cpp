// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance runner. Prints one PASS/FAIL line per criterion and exits
// non-zero when any selected criterion fails.
//
//   acceptance [--work-dir DIR] [--criteria 1,2,...]
//
// Criteria 8-10 train models and take hours on one CPU core; their artifacts
// are kept in the work directory and reused by later invocations.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "tcfb_oracle.hpp"
#include "tgvfm/backbone/backbone.hpp"
#include "tgvfm/core/errors.hpp"
#include "tgvfm/core/gradcheck.hpp"
#include "tgvfm/core/ops.hpp"
#include "tgvfm/e2vid/ssim.hpp"
#include "tgvfm/e2vid/train.hpp"
#include "tgvfm/harness/experiments.hpp"
#include "tgvfm/harness/report.hpp"
#include "tgvfm/objectives/losses.hpp"
#include "tgvfm/objectives/metrics.hpp"

namespace fs = std::filesystem;
using namespace tgvfm;
using tcfb::MemoryBank;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Tensor uniform(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor t(std::move(shape));
  for (auto& v : t.vec()) v = u(rng);
  return t;
}

Var probe(const Var& out, std::uint64_t seed) { return ops::sum(ops::mul(out, Var(uniform(out.shape(), seed)))); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1 -------------------------------------------------------------------------
Outcome zero_init_identity() {
  backbone::BackboneConfig with_cfg, without_cfg;
  without_cfg.n_tcfb_sites = 0;
  const backbone::TGVFM with(with_cfg, {}, 2026), without(without_cfg, {}, 2026);
  auto a = with.reset_banks(), b = without.reset_banks();
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const Tensor frame = uniform({64, 64}, 100 + i, 0.0, 1.0);
    const auto x = with.forward_frame(frame, a), y = without.forward_frame(frame, b);
    worst = std::max({worst, max_rel_diff(x.seg_logits.value(), y.seg_logits.value()),
                      max_rel_diff(x.depth.value(), y.depth.value())});
  }
  return {worst <= 1e-10, "100 frames, default backbone with 2 sites: max rel diff " + fmt("%.3g", worst) +
                              " (tol 1e-10)"};
}

// 2 -------------------------------------------------------------------------
Outcome gradient_suite() {
  // TCFB: every tensor randomised (the zero-init output too, or nothing upstream gets a gradient).
  tcfb::SiteShape shape{4, {2, 2}, 3, 2};
  tcfb::TCFBConfig cfg;
  ParamStore store;
  const auto p = tcfb::make_site_params(store, "tcfb.site0", shape, cfg, 1);
  std::uint64_t s = 10;
  for (auto& [name, v] : store.entries()) {
    Var h = v;
    h.mutable_value() = uniform(v.shape(), ++s, -0.8, 0.8);
  }
  MemoryBank bank(cfg.k);
  for (int t = 0; t < 3; ++t) bank.push(uniform({4, 4}, 50 + t), uniform({3, 4, 4}, 60 + t));
  Var f = Var::parameter(uniform({4, 4}, 70));
  auto params = store.entries();
  params.emplace_back("f_in", f);
  GradCheckOptions smooth;
  smooth.eps = 1e-3;
  smooth.five_point = true;
  double tcfb_worst = 0.0;
  std::size_t tcfb_entries = 0;
  for (const auto& e : gradcheck([&] { return probe(tcfb::tcfb_forward(f, bank, p, cfg, shape.grid), 7); }, params,
                                 smooth)) {
    tcfb_worst = std::max(tcfb_worst, e.max_rel_err);
    tcfb_entries += e.checked;
  }

  // E2VID-B0 on an 8x8 two-step unroll; ReLU kinks call for a small two-point step.
  e2vid::E2VIDModel m(e2vid::preset("B0"), 3);
  const Tensor v1 = uniform({5, 8, 8}, 80), v2 = uniform({5, 8, 8}, 81), target = uniform({8, 8}, 82, 0.0, 1.0);
  auto loss = [&] {
    auto st = m.step(Var(v1), m.init_state(8, 8));
    st = m.step(Var(v2), st.state);
    return ops::add(e2vid::reconstruction_loss(st.frame, Var(target)), probe(st.frame, 9));
  };
  GradCheckOptions kinked;
  kinked.eps = 1e-5;
  kinked.samples_per_tensor = 12;
  kinked.seed = 4;
  double e2_worst = 0.0;
  std::size_t e2_entries = 0, e2_tensors = 0;
  for (const auto& e : gradcheck(loss, m.params().entries(), kinked)) {
    e2_worst = std::max(e2_worst, e.max_rel_err);
    e2_entries += e.checked;
    ++e2_tensors;
  }
  const bool ok = tcfb_worst <= 1e-4 && e2_worst <= 1e-3;
  return {ok, "TCFB " + std::to_string(params.size()) + " tensors/" + std::to_string(tcfb_entries) +
                  " entries max rel " + fmt("%.2e", tcfb_worst) + " (tol 1e-4); E2VID-B0 " +
                  std::to_string(e2_tensors) + " tensors/" + std::to_string(e2_entries) + " entries max rel " +
                  fmt("%.2e", e2_worst) + " (tol 1e-3)"};
}

// 3 -------------------------------------------------------------------------
Outcome oracle_equivalence() {
  double lta = 0, cross = 0, window = 0, full = 0;
  for (int trial = 0; trial < 5; ++trial) {
    const int gh = 1 + trial % 4, gw = 4 - trial % 3, n = gh * gw, c = 3, d = 2;
    const tcfb::AttentionParams p{Var(uniform({c, d}, trial * 10 + 1)), Var(uniform({c, d}, trial * 10 + 2)),
                                  Var(uniform({c, d}, trial * 10 + 3)), Var(uniform({d, c}, trial * 10 + 4))};
    const oracle::Proj op(p);
    const Tensor fin = uniform({n, c}, trial * 10 + 5), prev = uniform({n, c}, trial * 10 + 6);
    std::vector<Var> hist{Var(prev), Var(uniform({n, c}, trial * 10 + 7))};
    std::vector<oracle::Mat> hist_m{oracle::to_mat(hist[0].value()), oracle::to_mat(hist[1].value())};
    const oracle::Mat pm = oracle::to_mat(prev);
    lta = std::max(lta, oracle::max_diff(oracle::to_mat(tcfb::lta_forward(Var(fin), hist, p).value()),
                                         oracle::lta(oracle::to_mat(fin), hist_m, op)));
    cross = std::max(cross, oracle::max_diff(oracle::to_mat(tcfb::cross_attention_forward(Var(fin), Var(prev), p).value()),
                                             oracle::cross(oracle::to_mat(fin), &pm, op)));
    window = std::max(window, oracle::max_diff(
                                  oracle::to_mat(tcfb::window_attention_forward(Var(fin), Var(prev), {gh, gw}, 1, p).value()),
                                  oracle::window(oracle::to_mat(fin), &pm, gh, gw, 1, op)));
  }
  // Composed block over a rollout with every tensor randomised.
  tcfb::SiteShape shape{3, {4, 4}, 2, 1};
  tcfb::TCFBConfig cfg;
  ParamStore store;
  const auto p = tcfb::make_site_params(store, "s", shape, cfg, 2);
  std::uint64_t s = 300;
  for (auto& [name, v] : store.entries()) {
    Var h = v;
    h.mutable_value() = uniform(v.shape(), ++s, -0.8, 0.8);
  }
  MemoryBank bank(cfg.k);
  std::vector<oracle::Mat> shallow;
  std::vector<Tensor> deep;
  for (int t = 0; t < 5; ++t) {
    const Tensor fin = uniform({16, 3}, 400 + t), F = uniform({2, 4, 4}, 500 + t);
    full = std::max(full, oracle::max_diff(oracle::to_mat(tcfb::tcfb_forward(Var(fin), bank, p, cfg, shape.grid).value()),
                                           oracle::tcfb(oracle::to_mat(fin), shallow, deep, p, 4, 4, cfg.delta)));
    bank.push(fin, F);
    shallow.insert(shallow.begin(), oracle::to_mat(fin));
    deep.insert(deep.begin(), F);
    if (static_cast<int>(shallow.size()) > cfg.k) shallow.pop_back(), deep.pop_back();
  }
  const double worst = std::max({lta, cross, window, full});
  return {worst <= 1e-9, "max abs diff LTA " + fmt("%.1e", lta) + ", cross " + fmt("%.1e", cross) + ", window " +
                             fmt("%.1e", window) + ", tcfb_forward " + fmt("%.1e", full) + " (tol 1e-9)"};
}

// 4 -------------------------------------------------------------------------
Outcome parameter_sharing() {
  const tcfb::SiteShape shape{64, {8, 8}, 32, 2};
  auto enumerate = [&](bool share) {
    ParamStore store;
    tcfb::TCFBConfig cfg;
    cfg.share_params = share;
    tcfb::make_all_sites(store, std::vector<tcfb::SiteShape>(4, shape), cfg, 0);
    std::set<const Node*> seen;
    std::size_t n = 0;
    for (const auto& [name, v] : store.entries()) {
      if (seen.insert(v.node()).second) n += v.numel();
    }
    return n;
  };
  const std::size_t shared = enumerate(true), unshared = enumerate(false);
  return {shared * 4 == unshared, "4 sites: shared " + std::to_string(shared) + " vs unshared " +
                                      std::to_string(unshared) + " scalars = " +
                                      fmt("%.4f", static_cast<double>(shared) / unshared) + " (expect 0.25)"};
}

// 5 -------------------------------------------------------------------------
Outcome memory_bank() {
  std::mt19937_64 rng(5);
  long mismatches = 0, sequences = 0;
  for (int k = 1; k <= 5; ++k) {
    for (int seq = 0; seq < 1000; ++seq, ++sequences) {
      MemoryBank bank(k);
      std::vector<double> pushed;
      const int len = static_cast<int>(rng() % 12);
      for (int i = 0; i < len; ++i) {
        const double v = static_cast<double>(rng() % 100000);
        bank.push(Tensor({1}, v), Tensor({1}, -v));
        pushed.push_back(v);
      }
      const int expect = std::min<int>(k, static_cast<int>(pushed.size()));
      if (bank.size() != expect) {
        ++mismatches;
        continue;
      }
      for (int i = 0; i < expect; ++i) {
        const double v = pushed[pushed.size() - 1 - i];
        if (bank.at(i).shallow[0] != v || bank.at(i).deep[0] != -v) ++mismatches;
      }
    }
  }
  return {mismatches == 0, std::to_string(sequences) + " random push sequences (k = 1..5, 1000 each): " +
                               std::to_string(mismatches) + " mismatches against the last-k oracle"};
}

// 6 -------------------------------------------------------------------------
Outcome silog_closed_forms() {
  double worst_half = 0.0, worst_one = 0.0;
  for (double c : {0.25, 0.5, 1.5, 2.0, 7.0}) {
    const Tensor gt = uniform({6, 6}, 600, 0.5, 20.0);
    Tensor pred = gt;
    for (auto& v : pred.vec()) v *= c;
    worst_half = std::max(worst_half,
                          std::abs(objectives::silog_loss(Var(pred), gt).value().item() - std::abs(std::log(c)) / std::sqrt(2.0)));
    worst_one = std::max(worst_one, std::abs(objectives::silog_loss(Var(pred), gt, {}, {1.0}).value().item()));
  }
  return {worst_half <= 1e-9 && worst_one <= 1e-9, "lambda 0.5 vs |ln c|/sqrt2: " + fmt("%.1e", worst_half) +
                                                       "; lambda 1 vs 0: " + fmt("%.1e", worst_one) + " (tol 1e-9)"};
}

// 7 -------------------------------------------------------------------------
Outcome metric_oracles() {
  std::mt19937_64 rng(7);
  int exact = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 4;
    std::vector<int> pred(64), gt(64);
    for (int i = 0; i < 64; ++i) pred[i] = static_cast<int>(rng() % n), gt[i] = static_cast<int>(rng() % n);
    const auto r = objectives::miou(pred, gt, n);
    double sum = 0.0;
    int present = 0;
    bool same = true;
    for (int c = 0; c < n; ++c) {
      long tp = 0, fp = 0, fn = 0;
      for (int i = 0; i < 64; ++i) {
        tp += pred[i] == c && gt[i] == c;
        fp += pred[i] == c && gt[i] != c;
        fn += pred[i] != c && gt[i] == c;
      }
      if (tp + fp + fn == 0) {
        same = same && std::isnan(r.per_class[c]);
        continue;
      }
      const double iou = static_cast<double>(tp) / static_cast<double>(tp + fp + fn);
      same = same && r.per_class[c] == iou;
      sum += iou;
      ++present;
    }
    same = same && r.mean == sum / present;
    exact += same;
  }
  bool ordered = true;
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor gt = uniform({8, 8}, 700 + trial, 0.5, 10.0), pred = uniform({8, 8}, 800 + trial, 0.5, 10.0);
    const auto m = objectives::depth_metrics(pred, gt);
    ordered = ordered && m.delta1 <= m.delta2 && m.delta2 <= m.delta3;
  }
  const Tensor gt = uniform({8, 8}, 900, 0.5, 10.0);
  Tensor scaled = gt;
  for (auto& v : scaled.vec()) v *= 1.25;
  const auto m = objectives::depth_metrics(scaled, gt);
  const bool scaling = m.delta1 == 0.0 && m.delta2 == 1.0 && m.delta3 == 1.0 && std::abs(m.rel - 0.25) <= 1e-12;
  return {exact == 50 && ordered && scaling,
          "miou exact on " + std::to_string(exact) + "/50 random 8x8 cases; delta1<=delta2<=delta3 " +
              (ordered ? "held" : "violated") + "; 1.25x case delta=(" + fmt("%g", m.delta1) + "," +
              fmt("%g", m.delta2) + "," + fmt("%g", m.delta3) + ") REL " + fmt("%.6f", m.rel)};
}

// Shared training setup for 8-10 --------------------------------------------
struct Shared {
  fs::path work;
  std::string e2vid_path() const { return (work / "e2vid_b0.e2v").string(); }
  std::string e2vid_eval_path() const { return (work / "e2vid_eval.txt").string(); }
};

harness::RunConfig temporal_config(const Shared& sh) {
  harness::RunConfig c;
  c.e2vid.checkpoint = sh.e2vid_path();
  c.data.cache_dir = (sh.work / "cache").string();
  c.backbone.channels = 32;
  return c;
}

harness::ExperimentOptions temporal_options() {
  harness::ExperimentOptions o;
  o.seeds = {0, 1, 2};
  o.pretrain_iterations = 2000;
  o.pretrain_lr = 1e-3;
  o.on_progress = [](const std::string& s) { std::fprintf(stderr, "  .. %s\n", s.c_str()); };
  return o;
}

// 10 ------------------------------------------------------------------------
Outcome e2vid_retraining(const Shared& sh) {
  const e2vid::SyntheticSceneSource source(7, events::SceneConfig{});
  if (!fs::exists(sh.e2vid_path())) {
    e2vid::E2VIDModel model(e2vid::preset("B0"), 0);
    e2vid::TrainOptions o;
    o.iterations = 5000;
    o.lr = 1e-3;
    o.crop = 32;
    o.seed = 0;
    e2vid::train(model, source, o, [](int it, double loss) {
      if (it % 500 == 0) std::fprintf(stderr, "  .. e2vid iter %d loss %.4f\n", it, loss);
    });
    model.save(sh.e2vid_path() + ".tmp");
    fs::rename(sh.e2vid_path() + ".tmp", sh.e2vid_path());
  }
  const auto model = e2vid::E2VIDModel::load(sh.e2vid_path());
  const auto r = e2vid::evaluate(model, source, 1000000, 32);
  const bool ok = r.ssim >= 0.6 && r.ssim_reset_state < r.ssim;
  return {ok, "B0, 5000 iterations: held-out SSIM " + fmt("%.4f", r.ssim) + " (>= 0.6) over " +
                  std::to_string(r.frames) + " frames; zeroed state " + fmt("%.4f", r.ssim_reset_state) +
                  " (must be lower)"};
}

// 8 -------------------------------------------------------------------------
Outcome temporal_benefit(const Shared& sh) {
  if (!fs::exists(sh.e2vid_path())) e2vid_retraining(sh);
  const auto cfg = temporal_config(sh);
  const auto data = harness::build_dataset(cfg);
  const auto out = (sh.work / "temporal").string();
  const auto t0 = std::chrono::steady_clock::now();
  const auto table = harness::run_ablation(cfg, data, out, temporal_options());
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60.0;
  harness::write_ablation_table(table, out + "/ablation.tsv");
  std::map<std::string, double> m;
  std::string rows;
  for (const auto& e : table) {
    m[e.row.name] = e.miou;
    rows += (rows.empty() ? "" : ", ") + e.row.name + " " + fmt("%.2f", e.miou);
  }
  const double gain = m["L+D+G"] - m["baseline"];
  const bool order = m["L+D+G"] + 0.5 >= m["L"] && m["L+D+G"] + 0.5 >= m["D"];
  return {gain >= 2.0 && order, "3 seeds x 2000 iterations (after a 2000-iteration TCFB-free warm-up): L+D+G - "
                                "baseline = " + fmt("%+.2f", gain) + " MIoU points (need >= 2); full vs single "
                                "components with 0.5 slack " + (order ? "ok" : "violated") + " [" + rows + "]; " +
                                fmt("%.0f", minutes) + " min"};
}

// 9 -------------------------------------------------------------------------
Outcome memory_sweep(const Shared& sh) {
  if (!fs::exists(sh.e2vid_path())) e2vid_retraining(sh);
  const auto cfg = temporal_config(sh);
  const auto data = harness::build_dataset(cfg);
  const auto out = (sh.work / "temporal").string();
  const auto table = harness::sweep_memory_k(cfg, {1, 2, 3, 4, 5}, data, out, temporal_options(), 15);
  harness::write_sweep_table(table, out + "/sweep_k.tsv");
  bool monotone = true;
  std::string rows;
  double running_max = 0.0;
  for (const auto& e : table) {
    // Non-decreasing within noise: no value may fall more than 10% below an earlier one.
    monotone = monotone && e.latency_ms >= 0.9 * running_max;
    running_max = std::max(running_max, e.latency_ms);
    rows += (rows.empty() ? "" : ", ") + ("k=" + std::to_string(e.k)) + " " + fmt("%.2f", e.miou) + "/" +
            fmt("%.2f ms", e.latency_ms);
  }
  const bool better = table[2].miou >= table[0].miou;
  return {monotone && better, std::string("latency non-decreasing within 10%: ") + (monotone ? "yes" : "no") +
                                  "; MIoU(k=3) " + fmt("%.2f", table[2].miou) + " vs MIoU(k=1) " +
                                  fmt("%.2f", table[0].miou) + " [" + rows + "]"};
}

// 11 ------------------------------------------------------------------------
Outcome determinism_resume(const Shared& sh) {
  harness::RunConfig c;
  c.e2vid.checkpoint = "init";
  c.backbone.channels = 32;
  c.data.train_sequences = 16;
  c.data.eval_sequences = 4;
  c.train.iterations = 40;
  c.train.log_every = 5;
  c.train.eval_every = 20;
  c.train.checkpoint_every = 10;
  const auto data = harness::build_dataset(c);
  const fs::path dir = sh.work / "determinism";
  fs::remove_all(dir);
  auto stripped = [](const std::string& path) {
    std::vector<std::string> out;
    for (auto r : harness::read_metrics(path)) {
      r.wall_ms = 0.0;
      out.push_back(r.to_json());
    }
    return out;
  };
  const auto a = harness::run_training(c, data, (dir / "a").string());
  const auto b = harness::run_training(c, data, (dir / "b").string());
  const bool identical = stripped((dir / "a/metrics.log").string()) == stripped((dir / "b/metrics.log").string());
  harness::RunOptions halt;
  halt.halt_after = 20;
  harness::run_training(c, data, (dir / "r").string(), halt);
  const auto r = harness::run_training(c, data, (dir / "r").string());
  double worst = 0.0;
  for (const auto& [k, v] : a.final_metrics) {
    const double w = r.final_metrics.count(k) ? r.final_metrics.at(k) : std::nan("");
    worst = std::max(worst, std::isnan(v) && std::isnan(w) ? 0.0 : std::abs(w - v));
  }
  const auto la = a.loss_curve(), lr = r.loss_curve();
  for (std::size_t i = 0; i < std::min(la.size(), lr.size()); ++i) worst = std::max(worst, std::abs(la[i].second - lr[i].second));
  const bool ok = identical && r.finalized && la.size() == lr.size() && worst <= 1e-6;
  return {ok, std::string("two runs, same seed: metrics.log ") + (identical ? "identical" : "DIFFERENT") +
                  " (wall_ms excluded); halted at 20/40 and resumed: max metric diff " + fmt("%.1e", worst) +
                  " (tol 1e-6)"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string work = "acceptance_work";
  std::vector<int> selected{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11};
  app.add_option("--work-dir", work, "Artifacts of the training criteria")->envname("TGVFM_ACCEPTANCE_WORK_DIR");
  app.add_option("--criteria", selected, "Criteria to run")->delimiter(',')->envname("TGVFM_ACCEPTANCE_CRITERIA");
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(work);
  const Shared sh{fs::absolute(work)};

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"zero-init identity", zero_init_identity},
      {"gradient suite", gradient_suite},
      {"oracle equivalence", oracle_equivalence},
      {"parameter sharing", parameter_sharing},
      {"memory-bank semantics", memory_bank},
      {"SiLog closed forms", silog_closed_forms},
      {"metric oracles", metric_oracles},
      {"temporal benefit", [&] { return temporal_benefit(sh); }},
      {"memory sweep", [&] { return memory_sweep(sh); }},
      {"E2VID retraining", [&] { return e2vid_retraining(sh); }},
      {"determinism & resume", [&] { return determinism_resume(sh); }},
  };
  // Training criteria run in dependency order: 10 produces the E2VID checkpoint 8 and 9 use.
  std::vector<int> order;
  for (int id : {1, 2, 3, 4, 5, 6, 7, 11, 10, 8, 9}) {
    if (std::find(selected.begin(), selected.end(), id) != selected.end()) order.push_back(id);
  }
  int failed = 0;
  for (int id : order) {
    const auto& [name, fn] = criteria.at(static_cast<std::size_t>(id - 1));
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d %-22s %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
