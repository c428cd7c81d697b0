// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/harness/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "tgvfm/core/errors.hpp"
#include "tgvfm/core/image_io.hpp"

namespace tgvfm::harness {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v, int digits = 4) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::trunc | std::ios::binary);
  if (!os) throw IoError("cannot write " + path);
  os << text;
}

std::string yes(bool b) { return b ? "x" : "-"; }

}  // namespace

void plot_curve(const std::vector<std::pair<long long, double>>& points, const std::string& path, int width,
                int height) {
  Raster img;
  img.width = width;
  img.height = height;
  img.samples.assign(static_cast<std::size_t>(width) * height, 255);
  auto put = [&](int x, int y, int v) {
    if (x >= 0 && y >= 0 && x < width && y < height) img.samples[static_cast<std::size_t>(y) * width + x] = v;
  };
  const int left = 8, right = width - 8, top = 8, bottom = height - 8;
  for (int x = left; x <= right; ++x) put(x, bottom, 0);
  for (int y = top; y <= bottom; ++y) put(left, y, 0);

  std::vector<std::pair<double, double>> pts;
  for (const auto& [i, v] : points) {
    if (std::isfinite(v)) pts.emplace_back(static_cast<double>(i), v);
  }
  if (!pts.empty()) {
    double x0 = pts.front().first, x1 = pts.back().first, y0 = pts.front().second, y1 = y0;
    for (const auto& p : pts) y0 = std::min(y0, p.second), y1 = std::max(y1, p.second);
    if (x1 <= x0) x1 = x0 + 1.0;
    if (y1 <= y0) y1 = y0 + 1.0;
    auto px = [&](double x) { return left + static_cast<int>(std::lround((x - x0) / (x1 - x0) * (right - left))); };
    auto py = [&](double y) { return bottom - static_cast<int>(std::lround((y - y0) / (y1 - y0) * (bottom - top))); };
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const int ax = px(pts[i].first), ay = py(pts[i].second);
      const int bx = i + 1 < pts.size() ? px(pts[i + 1].first) : ax;
      const int by = i + 1 < pts.size() ? py(pts[i + 1].second) : ay;
      const int n = std::max({std::abs(bx - ax), std::abs(by - ay), 1});
      for (int s = 0; s <= n; ++s) {
        put(ax + (bx - ax) * s / n, ay + (by - ay) * s / n, 60);
      }
    }
  }
  write_png(path, img);
}

std::vector<std::string> emit_report(const std::vector<RunRecord>& records, const std::string& report_dir) {
  if (records.empty()) throw ContractError("report needs at least one run record");
  for (const auto& r : records) {
    if (!r.finalized) throw ContractError("run '" + r.name + "' is not finalized; resume or finish it first");
  }
  fs::create_directories(report_dir);
  std::set<std::string> keys;
  for (const auto& r : records) {
    for (const auto& [k, v] : r.final_metrics) keys.insert(k);
  }
  std::string tsv = "run\tfinal_iteration\tfinal_loss";
  for (const auto& k : keys) tsv += "\t" + k;
  tsv += "\n";
  std::vector<std::string> files;
  for (const auto& r : records) {
    const auto curve = r.loss_curve();
    tsv += r.name + "\t" + std::to_string(r.log.empty() ? 0 : r.log.back().iteration) + "\t" +
           (curve.empty() ? "nan" : fmt(curve.back().second, 6));
    for (const auto& k : keys) {
      const auto it = r.final_metrics.find(k);
      tsv += "\t" + (it == r.final_metrics.end() ? std::string("-") : fmt(it->second));
    }
    tsv += "\n";
    const std::string png = (fs::path(report_dir) / (r.name + ".loss.png")).string();
    plot_curve(curve, png);
    files.push_back(png);
  }
  const std::string table = (fs::path(report_dir) / "runs.tsv").string();
  write_text(table, tsv);
  files.insert(files.begin(), table);
  return files;
}

void write_ablation_table(const std::vector<AblationEntry>& table, const std::string& path) {
  std::string s = "row\tLTA\tDSA\tDFGM\tMIoU\tImpro.\tper_seed\n";
  for (const auto& e : table) {
    std::string seeds;
    for (const auto& r : e.runs) seeds += (seeds.empty() ? "" : ",") + fmt(r.final_metrics.at("eval.miou"), 2);
    s += e.row.name + "\t" + yes(e.row.lta) + "\t" + yes(e.row.dsa) + "\t" + yes(e.row.dfgm) + "\t" +
         fmt(e.miou, 2) + "\t" + (e.improvement >= 0 ? "+" : "") + fmt(e.improvement, 2) + "\t" + seeds + "\n";
  }
  write_text(path, s);
}

void write_sweep_table(const std::vector<SweepEntry>& table, const std::string& path) {
  std::string s = "k\tMIoU\tInfer_ms\n";
  for (const auto& e : table) s += std::to_string(e.k) + "\t" + fmt(e.miou, 2) + "\t" + fmt(e.latency_ms, 2) + "\n";
  write_text(path, s);
}

}  // namespace tgvfm::harness
