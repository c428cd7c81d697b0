// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/e2vid/model.hpp"

#include "tgvfm/core/checkpoint.hpp"
#include "tgvfm/core/errors.hpp"
#include "tgvfm/core/ops.hpp"

namespace tgvfm::e2vid {

namespace {
constexpr const char* kMagic = "E2V1";
}  // namespace

RecurrentState RecurrentState::detached() const {
  RecurrentState s;
  for (const auto& h : hidden) s.hidden.push_back(h.detach());
  for (const auto& c : cell) s.cell.push_back(c.detach());
  return s;
}

RecurrentState init_state(const E2VIDConfig& config, int height, int width) {
  const int div = 1 << config.n_stages();
  if (height <= 0 || width <= 0 || height % div != 0 || width % div != 0) {
    throw ConfigError("resolution " + std::to_string(height) + "x" + std::to_string(width) +
                      " is not divisible by " + std::to_string(div));
  }
  RecurrentState s;
  for (int i = 0; i < config.n_stages(); ++i) {
    const Shape shape{config.encoder_channels[i], height >> (i + 1), width >> (i + 1)};
    s.hidden.emplace_back(Tensor::zeros(shape));
    if (config.cell == CellType::ConvLSTM) s.cell.emplace_back(Tensor::zeros(shape));
  }
  return s;
}

E2VIDModel::E2VIDModel(E2VIDConfig config, std::uint64_t seed) : config_(std::move(config)) {
  for (const auto& spec : param_specs(config_)) {
    if (spec.is_bias) {
      params_.add(spec.name, init::zeros(spec.shape));
    } else {
      auto rng = rng_for(seed, "e2vid." + spec.name);
      params_.add(spec.name, init::he(spec.shape, spec.fan_in, rng));
    }
  }
}

Var E2VIDModel::conv(const std::string& prefix, const Var& x, int stride, int pad) const {
  return ops::conv2d(x, params_.get(prefix + ".w"), params_.get(prefix + ".b"), stride, pad);
}

E2VIDModel::Step E2VIDModel::step(const Var& voxel, const RecurrentState& state) const {
  const int stages = config_.n_stages();
  if (voxel.shape().size() != 3 || voxel.dim(0) != config_.in_channels) {
    throw ContractError("voxel shape " + shape_str(voxel.shape()) + " does not match " +
                        std::to_string(config_.in_channels) + " bins");
  }
  if (static_cast<int>(state.hidden.size()) != stages ||
      (config_.cell == CellType::ConvLSTM && static_cast<int>(state.cell.size()) != stages)) {
    throw ContractError("recurrent state has the wrong number of stages");
  }
  for (int i = 0; i < stages; ++i) {
    const Shape& hs = state.hidden[i].shape();
    if (hs[1] << (i + 1) != voxel.dim(1) || hs[2] << (i + 1) != voxel.dim(2)) {
      throw ContractError("voxel " + shape_str(voxel.shape()) + " does not match state " + shape_str(hs));
    }
  }

  Step out;
  Var head = ops::relu(conv("head", voxel, 1, 2));
  Var x = head;
  std::vector<Var> skips;
  for (int i = 0; i < stages; ++i) {
    const std::string p = "enc" + std::to_string(i);
    const int ch = config_.encoder_channels[i];
    x = ops::relu(conv(p + ".conv", x, 2, 2));
    const Var& h = state.hidden[i];
    Var xh = ops::concat0({x, h});
    if (config_.cell == CellType::ConvGRU) {
      Var gates = ops::sigmoid(conv(p + ".gates", xh, 1, 1));
      Var z = ops::slice0(gates, 0, ch);
      Var r = ops::slice0(gates, ch, 2 * ch);
      Var cand = ops::tanh(conv(p + ".cand", ops::concat0({x, ops::mul(r, h)}), 1, 1));
      // h' = h + z * (cand - h)
      x = ops::add(h, ops::mul(z, ops::sub(cand, h)));
    } else {
      Var gates = conv(p + ".gates", xh, 1, 1);
      Var in = ops::sigmoid(ops::slice0(gates, 0, ch));
      Var forget = ops::sigmoid(ops::slice0(gates, ch, 2 * ch));
      Var outg = ops::sigmoid(ops::slice0(gates, 2 * ch, 3 * ch));
      Var g = ops::tanh(ops::slice0(gates, 3 * ch, 4 * ch));
      Var c = ops::add(ops::mul(forget, state.cell[i]), ops::mul(in, g));
      out.state.cell.push_back(c);
      x = ops::mul(outg, ops::tanh(c));
    }
    out.state.hidden.push_back(x);
    skips.push_back(x);
  }
  for (int r = 0; r < config_.n_residual_blocks; ++r) {
    const std::string p = "res" + std::to_string(r);
    Var y = ops::relu(conv(p + ".conv1", x, 1, 1));
    y = conv(p + ".conv2", y, 1, 1);
    x = ops::relu(ops::add(x, y));
  }
  for (int i = stages - 1; i >= 0; --i) {
    x = ops::add(x, skips[i]);
    x = ops::upsample_nearest(x, 2);
    x = ops::relu(conv("dec" + std::to_string(i), x, 1, 2));
  }
  x = ops::add(x, head);
  out.frame = ops::sigmoid(conv("pred", x, 1, 0));
  return out;
}

std::vector<Tensor> E2VIDModel::reconstruct(const std::vector<events::VoxelGrid>& voxels, bool reset_state) const {
  std::vector<Tensor> frames;
  if (voxels.empty()) return frames;
  NoGradGuard no_grad;
  const int h = voxels.front().height(), w = voxels.front().width();
  RecurrentState state = init_state(h, w);
  for (const auto& v : voxels) {
    if (reset_state) state = init_state(h, w);
    Step s = step(Var(v.bins), state);
    state = std::move(s.state);
    frames.push_back(s.frame.value().reshaped({h, w}));
  }
  return frames;
}

void E2VIDModel::save(const std::string& path) const {
  TensorArchive a;
  a.magic = kMagic;
  a.config_text = config_.to_text();
  a.dtype = TensorDType::F32;
  for (const auto& [name, v] : params_.entries()) a.tensors.emplace_back(name, v.value());
  write_archive(path, a);
}

E2VIDModel E2VIDModel::load(const std::string& path) {
  const TensorArchive a = read_archive(path, kMagic);
  E2VIDModel m(E2VIDConfig::from_text(a.config_text), 0);
  for (auto& [name, v] : m.params_.entries()) {
    const Tensor& t = a.find(name);
    if (t.shape() != v.shape()) throw IoError(path + ": tensor '" + name + "' has shape " + shape_str(t.shape()));
    Var copy = v;
    copy.mutable_value() = t;
  }
  return m;
}

}  // namespace tgvfm::e2vid
