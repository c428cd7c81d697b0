// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/e2vid/config.hpp"

#include "tgvfm/core/errors.hpp"
#include "tgvfm/core/kv.hpp"
#include "tgvfm/core/tensor.hpp"

namespace tgvfm::e2vid {

std::string cell_name(CellType cell) { return cell == CellType::ConvGRU ? "ConvGRU" : "ConvLSTM"; }

std::string E2VIDConfig::to_text() const {
  KeyValues kv;
  kv.set("preset", preset);
  kv.set("cell", cell_name(cell));
  kv.set("base_channels", std::to_string(base_channels));
  kv.set("encoder_channels", join_ints(encoder_channels));
  kv.set("n_residual_blocks", std::to_string(n_residual_blocks));
  kv.set("in_channels", std::to_string(in_channels));
  return kv.to_text();
}

E2VIDConfig E2VIDConfig::from_text(const std::string& text) {
  const KeyValues kv = KeyValues::parse(text);
  E2VIDConfig c;
  c.preset = kv.get("preset");
  const std::string cell = kv.get("cell");
  if (cell == "ConvGRU") {
    c.cell = CellType::ConvGRU;
  } else if (cell == "ConvLSTM") {
    c.cell = CellType::ConvLSTM;
  } else {
    throw ConfigError("unknown recurrent cell '" + cell + "'");
  }
  c.base_channels = static_cast<int>(kv.integer("base_channels", 0));
  c.encoder_channels = kv.int_list("encoder_channels", {});
  c.n_residual_blocks = static_cast<int>(kv.integer("n_residual_blocks", -1));
  c.in_channels = static_cast<int>(kv.integer("in_channels", 5));
  if (c.base_channels <= 0 || c.encoder_channels.empty() || c.n_residual_blocks < 0 || c.in_channels <= 0) {
    throw ConfigError("incomplete E2VID configuration");
  }
  return c;
}

E2VIDConfig preset(const std::string& name) {
  using enum CellType;
  if (name == "B0") return {"B0", ConvGRU, 12, {24, 48}, 1};
  if (name == "B1") return {"B1", ConvGRU, 16, {32, 64, 128}, 1};
  if (name == "B2") return {"B2", ConvLSTM, 20, {40, 80, 160}, 2};
  if (name == "B3") return {"B3", ConvLSTM, 32, {64, 100, 200}, 2};
  if (name == "B4") return {"B4", ConvLSTM, 32, {64, 150, 300, 512}, 3};
  throw ConfigError("unknown E2VID preset '" + name + "' (available: B0..B4)");
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"B0", "B1", "B2", "B3", "B4"};
  return names;
}

std::vector<ParamSpec> param_specs(const E2VIDConfig& c) {
  std::vector<ParamSpec> specs;
  auto conv = [&](const std::string& name, int out, int in, int k) {
    specs.push_back({name + ".w", {out, in, k, k}, in * k * k, false});
    specs.push_back({name + ".b", {out}, in * k * k, true});
  };
  const int gates = c.cell == CellType::ConvGRU ? 2 : 4;
  conv("head", c.base_channels, c.in_channels, 5);
  int prev = c.base_channels;
  for (int i = 0; i < c.n_stages(); ++i) {
    const int ch = c.encoder_channels[i];
    const std::string p = "enc" + std::to_string(i);
    conv(p + ".conv", ch, prev, 5);
    conv(p + ".gates", gates * ch, 2 * ch, 3);
    if (c.cell == CellType::ConvGRU) conv(p + ".cand", ch, 2 * ch, 3);
    prev = ch;
  }
  for (int r = 0; r < c.n_residual_blocks; ++r) {
    conv("res" + std::to_string(r) + ".conv1", prev, prev, 3);
    conv("res" + std::to_string(r) + ".conv2", prev, prev, 3);
  }
  for (int i = c.n_stages() - 1; i >= 0; --i) {
    const int out = i > 0 ? c.encoder_channels[i - 1] : c.base_channels;
    conv("dec" + std::to_string(i), out, c.encoder_channels[i], 5);
  }
  conv("pred", 1, c.base_channels, 1);
  return specs;
}

std::size_t param_count(const E2VIDConfig& config) {
  std::size_t n = 0;
  for (const auto& s : param_specs(config)) n += shape_numel(s.shape);
  return n;
}

}  // namespace tgvfm::e2vid
