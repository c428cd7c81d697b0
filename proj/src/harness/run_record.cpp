// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/harness/run_record.hpp"

#include <cstdio>
#include <limits>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tgvfm/core/errors.hpp"

namespace tgvfm::harness {

using nlohmann::json;

std::string MetricRecord::to_json() const {
  // Ordered object keeps iteration and wall_ms first; values follow sorted by name.
  nlohmann::ordered_json j;
  j["iteration"] = iteration;
  j["wall_ms"] = wall_ms;
  for (const auto& [k, v] : values) j[k] = v;
  return j.dump(-1, ' ', false, json::error_handler_t::strict);
}

MetricRecord MetricRecord::from_json(const std::string& line) {
  const json j = json::parse(line);
  MetricRecord r;
  for (const auto& [k, v] : j.items()) {
    if (k == "iteration") {
      r.iteration = v.get<long long>();
    } else if (k == "wall_ms") {
      r.wall_ms = v.get<double>();
    } else {
      r.values[k] = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
    }
  }
  return r;
}

void append_metric(const std::string& path, const MetricRecord& record) {
  std::ofstream os(path, std::ios::app);
  if (!os) throw IoError("cannot append to " + path);
  os << record.to_json() << '\n';
  os.flush();
}

std::vector<MetricRecord> read_metrics(const std::string& path) {
  std::vector<MetricRecord> out;
  std::ifstream is(path);
  if (!is) return out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(MetricRecord::from_json(line));
    } catch (const json::exception&) {
      if (is.peek() != std::char_traits<char>::eof()) throw IoError(path + ": malformed metrics line");
    }
  }
  return out;
}

void truncate_metrics(const std::string& path, long long iteration) {
  const auto records = read_metrics(path);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw IoError("cannot write " + tmp);
    for (const auto& r : records) {
      if (r.iteration < iteration) os << r.to_json() << '\n';
    }
  }
  std::filesystem::rename(tmp, path);
}

std::vector<std::pair<long long, double>> RunRecord::loss_curve(const std::string& key) const {
  std::vector<std::pair<long long, double>> out;
  for (const auto& r : log) {
    if (auto it = r.values.find(key); it != r.values.end()) out.emplace_back(r.iteration, it->second);
  }
  return out;
}

void save_record(const std::string& path, const RunRecord& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  j["finalized"] = r.finalized;
  j["config"] = r.config_text;
  j["final_metrics"] = r.final_metrics;
  j["timing"] = r.timing;
  j["artifacts"] = r.artifacts;
  auto log = nlohmann::ordered_json::array();
  for (const auto& m : r.log) log.push_back(nlohmann::ordered_json::parse(m.to_json()));
  j["log"] = log;
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw IoError("cannot write " + tmp);
    os << j.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

RunRecord load_record(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("run record " + path + " not found");
  try {
    const json j = json::parse(is);
    RunRecord r;
    r.name = j.at("name").get<std::string>();
    r.finalized = j.at("finalized").get<bool>();
    r.config_text = j.at("config").get<std::string>();
    for (const auto& [k, v] : j.at("final_metrics").items()) {
      r.final_metrics[k] = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
    }
    r.timing = j.at("timing").get<std::map<std::string, double>>();
    r.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
    for (const auto& m : j.at("log")) r.log.push_back(MetricRecord::from_json(m.dump()));
    return r;
  } catch (const json::exception& e) {
    throw IoError(path + ": malformed run record (" + e.what() + ")");
  }
}

}  // namespace tgvfm::harness
