// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/backbone/backbone.hpp"

#include <algorithm>
#include <cmath>

#include "tgvfm/core/checkpoint.hpp"
#include "tgvfm/core/errors.hpp"
#include "tgvfm/core/ops.hpp"

namespace tgvfm::backbone {

namespace {

constexpr const char* kMagic = "TGV1";
// Initial log-depth offset; scenes place depths between a few units and a few tens.
const double kDepthBiasInit = std::log(10.0);

}  // namespace

void BackboneConfig::validate() const {
  if (n_blocks < 1 || channels < 1 || patch_size < 1 || n_heads < 1 || mlp_mult < 1 || decoder_channels < 1 ||
      n_classes < 2 || image_height < 1 || image_width < 1 || n_tcfb_sites < 0) {
    throw ConfigError("backbone: sizes must be positive (n_classes >= 2, n_tcfb_sites >= 0)");
  }
  if (image_height % patch_size != 0 || image_width % patch_size != 0) {
    throw ConfigError("backbone: resolution " + std::to_string(image_height) + "x" + std::to_string(image_width) +
                      " is not divisible by patch size " + std::to_string(patch_size));
  }
  if (channels % n_heads != 0) throw ConfigError("backbone: channels must be divisible by n_heads");
  if (n_tcfb_sites > n_blocks) throw ConfigError("backbone: more TCFB sites than blocks");
}

void write_config(KeyValues& kv, const std::string& prefix, const BackboneConfig& c) {
  auto set = [&](const char* f, int v) { kv.set(prefix + "." + f, std::to_string(v)); };
  set("n_blocks", c.n_blocks);
  set("channels", c.channels);
  set("patch_size", c.patch_size);
  set("n_heads", c.n_heads);
  set("mlp_mult", c.mlp_mult);
  set("decoder_channels", c.decoder_channels);
  set("n_classes", c.n_classes);
  set("image_height", c.image_height);
  set("image_width", c.image_width);
  set("n_tcfb_sites", c.n_tcfb_sites);
}

BackboneConfig read_config(const KeyValues& kv, const std::string& prefix) {
  BackboneConfig c;
  auto get = [&](const char* f, int& v) { v = static_cast<int>(kv.integer(prefix + "." + f, v)); };
  get("n_blocks", c.n_blocks);
  get("channels", c.channels);
  get("patch_size", c.patch_size);
  get("n_heads", c.n_heads);
  get("mlp_mult", c.mlp_mult);
  get("decoder_channels", c.decoder_channels);
  get("n_classes", c.n_classes);
  get("image_height", c.image_height);
  get("image_width", c.image_width);
  get("n_tcfb_sites", c.n_tcfb_sites);
  c.validate();
  return c;
}

std::vector<int> site_blocks(const BackboneConfig& config, const tcfb::TCFBConfig& tcfb_config) {
  config.validate();
  if (config.n_tcfb_sites == 0) return {};
  if (!tcfb_config.insertion_sites.empty()) {
    std::vector<int> s = tcfb_config.insertion_sites;
    if (static_cast<int>(s.size()) != config.n_tcfb_sites) {
      throw ConfigError("tcfb.insertion_sites lists " + std::to_string(s.size()) + " sites, expected " +
                        std::to_string(config.n_tcfb_sites));
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] < 1 || s[i] > config.n_blocks || (i > 0 && s[i] <= s[i - 1])) {
        throw ConfigError("tcfb.insertion_sites must be increasing block indices in [1, n_blocks]");
      }
    }
    return s;
  }
  if (config.n_blocks % config.n_tcfb_sites != 0) {
    throw ConfigError("n_blocks (" + std::to_string(config.n_blocks) + ") is not divisible by n_tcfb_sites (" +
                      std::to_string(config.n_tcfb_sites) + "); list tcfb.insertion_sites explicitly");
  }
  const int step = config.n_blocks / config.n_tcfb_sites;
  std::vector<int> s;
  for (int b = step; b <= config.n_blocks; b += step) s.push_back(b);
  return s;
}

bool BankSet::all_empty() const {
  return std::all_of(banks.begin(), banks.end(), [](const tcfb::MemoryBank& b) { return b.empty(); });
}

BankSet reset_banks(const BackboneConfig& config, const tcfb::TCFBConfig& tcfb_config) {
  BankSet set;
  for (std::size_t i = 0; i < site_blocks(config, tcfb_config).size(); ++i) set.banks.emplace_back(tcfb_config.k);
  return set;
}

TGVFM::TGVFM(BackboneConfig config, tcfb::TCFBConfig tcfb_config, std::uint64_t seed)
    : config_(config), tcfb_config_(std::move(tcfb_config)), seed_(seed) {
  config_.validate();
  tcfb_config_.validate();
  sites_ = site_blocks(config_, tcfb_config_);

  const int c = config_.channels, p = config_.patch_size, cd = config_.decoder_channels;
  const int hidden = config_.mlp_mult * c, n = config_.grid().tokens();
  auto add = [&](const std::string& name, Tensor t) { return params_.add("backbone." + name, std::move(t)); };
  auto rng = [&](const std::string& name) { return rng_for(seed, "backbone." + name); };
  auto xavier = [&](const std::string& name, Shape s, int fan_in, int fan_out) {
    auto r = rng(name);
    return add(name, init::xavier(std::move(s), fan_in, fan_out, r));
  };

  patch_w_ = xavier("patch.w", {c, 1, p, p}, p * p, c);
  patch_b_ = add("patch.b", init::zeros({c}));
  {
    auto r = rng("pos");
    pos_ = add("pos", init::normal({n, c}, 0.02, r));
  }
  for (int b = 0; b < config_.n_blocks; ++b) {
    const std::string pre = "block" + std::to_string(b) + ".";
    ViTBlockParams bp;
    bp.ln1_g = add(pre + "ln1.g", init::constant({c}, 1.0));
    bp.ln1_b = add(pre + "ln1.b", init::zeros({c}));
    bp.w_qkv = xavier(pre + "qkv.w", {c, 3 * c}, c, c);
    bp.b_qkv = add(pre + "qkv.b", init::zeros({3 * c}));
    bp.w_proj = xavier(pre + "proj.w", {c, c}, c, c);
    bp.b_proj = add(pre + "proj.b", init::zeros({c}));
    bp.ln2_g = add(pre + "ln2.g", init::constant({c}, 1.0));
    bp.ln2_b = add(pre + "ln2.b", init::zeros({c}));
    bp.w1 = xavier(pre + "mlp.w1", {c, hidden}, c, hidden);
    bp.b1 = add(pre + "mlp.b1", init::zeros({hidden}));
    bp.w2 = xavier(pre + "mlp.w2", {hidden, c}, hidden, c);
    bp.b2 = add(pre + "mlp.b2", init::zeros({c}));
    blocks_.push_back(bp);
  }
  neck_ln_g_ = add("neck.ln.g", init::constant({c}, 1.0));
  neck_ln_b_ = add("neck.ln.b", init::zeros({c}));
  neck_w_ = xavier("neck.w", {cd, c, 3, 3}, 9 * c, 9 * cd);
  neck_b_ = add("neck.b", init::zeros({cd}));
  seg_w_ = xavier("seg.w", {config_.n_classes, cd, 1, 1}, cd, config_.n_classes);
  seg_b_ = add("seg.b", init::zeros({config_.n_classes}));
  depth_w_ = xavier("depth.w", {1, cd, 1, 1}, cd, 1);
  depth_b_ = add("depth.b", init::constant({1}, kDepthBiasInit));

  if (has_tcfb()) {
    const tcfb::SiteShape shape{c, config_.grid(), cd, 2};
    site_params_ = tcfb::make_all_sites(params_, std::vector<tcfb::SiteShape>(sites_.size(), shape), tcfb_config_,
                                        seed);
  }
}

ParamStore TGVFM::tcfb_params() const {
  ParamStore out;
  for (const auto& [name, v] : params_.entries()) {
    if (name.rfind("tcfb.", 0) == 0) out.alias(name, v);
  }
  return out;
}

BankSet TGVFM::reset_banks() const { return backbone::reset_banks(config_, tcfb_config_); }

Var TGVFM::vit_block(const Var& x, const ViTBlockParams& p) const {
  const int c = config_.channels, heads = config_.n_heads, dh = c / heads;
  const int n = x.dim(0);
  const Var h = ops::layer_norm(x, p.ln1_g, p.ln1_b);
  const Var qkv = ops::linear(h, p.w_qkv, p.b_qkv);
  const auto index = ops::AttendIndex::dense(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<Var> outs;
  for (int i = 0; i < heads; ++i) {
    outs.push_back(ops::attend(ops::slice_cols(qkv, i * dh, (i + 1) * dh),
                               ops::slice_cols(qkv, c + i * dh, c + (i + 1) * dh),
                               ops::slice_cols(qkv, 2 * c + i * dh, 2 * c + (i + 1) * dh), index, scale));
  }
  const Var attn = heads == 1 ? outs.front() : ops::concat_cols(outs);
  const Var y = ops::add(x, ops::linear(attn, p.w_proj, p.b_proj));
  const Var m = ops::linear(ops::gelu(ops::linear(ops::layer_norm(y, p.ln2_g, p.ln2_b), p.w1, p.b1)), p.w2, p.b2);
  return ops::add(y, m);
}

ModelOutput TGVFM::forward_frame(const Tensor& gray, BankSet& banks) const {
  const int hh = config_.image_height, ww = config_.image_width;
  Tensor img;
  if (gray.rank() == 2 && gray.dim(0) == hh && gray.dim(1) == ww) {
    img = gray.reshaped({1, hh, ww});
  } else if (gray.rank() == 3 && gray.dim(0) == 1 && gray.dim(1) == hh && gray.dim(2) == ww) {
    img = gray;
  } else {
    throw ContractError("forward_frame: expected a " + std::to_string(hh) + "x" + std::to_string(ww) +
                        " frame, got " + shape_str(gray.shape()));
  }
  if (banks.banks.size() != sites_.size()) throw ContractError("forward_frame: bank set does not match the sites");

  const tcfb::Grid grid = config_.grid();
  Var x = ops::conv2d(Var(img), patch_w_, patch_b_, config_.patch_size, 0);
  x = ops::add(tcfb::map_to_tokens(x), pos_);

  std::vector<Tensor> site_inputs;
  std::size_t next_site = 0;
  for (int b = 0; b < config_.n_blocks; ++b) {
    const Var f_in = x;
    x = vit_block(x, blocks_[b]);
    if (next_site < sites_.size() && sites_[next_site] == b + 1) {
      x = ops::add(x, tcfb::tcfb_forward(f_in, banks.banks[next_site], site_params_[next_site], tcfb_config_, grid));
      site_inputs.push_back(f_in.value());
      ++next_site;
    }
  }

  Var map = tcfb::tokens_to_map(ops::layer_norm(x, neck_ln_g_, neck_ln_b_), grid);
  const Var deep = ops::gelu(ops::conv2d(ops::upsample_nearest(map, 2), neck_w_, neck_b_, 1, 1));

  ModelOutput out;
  out.seg_logits = ops::upsample_bilinear(ops::conv2d(deep, seg_w_, seg_b_, 1, 0), hh, ww);
  out.depth = ops::reshape(ops::exp(ops::upsample_bilinear(ops::conv2d(deep, depth_w_, depth_b_, 1, 0), hh, ww)),
                           {hh, ww});
  out.deep_feature = deep.value();
  for (std::size_t i = 0; i < site_inputs.size(); ++i) banks.banks[i].push(site_inputs[i], out.deep_feature);
  return out;
}

std::string TGVFM::config_text() const {
  KeyValues kv;
  kv.set("seed", std::to_string(seed_));
  write_config(kv, "backbone", config_);
  tcfb::write_config(kv, "tcfb", tcfb_config_);
  return kv.to_text();
}

void TGVFM::save(const std::string& path) const {
  TensorArchive a;
  a.magic = kMagic;
  a.config_text = config_text();
  a.dtype = TensorDType::F64;
  for (const auto& [name, v] : params_.unique()) a.tensors.emplace_back(name, v.value());
  write_archive(path, a);
}

void TGVFM::load_params(const std::string& path) {
  const TensorArchive a = read_archive(path, kMagic);
  const KeyValues saved = KeyValues::parse(a.config_text), mine = KeyValues::parse(config_text());
  for (const auto& [key, value] : mine.entries()) {
    if (key == "seed") continue;
    if (!saved.has(key) || saved.get(key) != value) {
      throw IoError(path + ": checkpoint config differs at '" + key + "'");
    }
  }
  for (auto& [name, v] : params_.unique()) {
    if (!a.has(name)) throw IoError(path + ": missing tensor '" + name + "'");
    const Tensor& t = a.find(name);
    if (t.shape() != v.shape()) throw IoError(path + ": shape mismatch for '" + name + "'");
    Var handle = v;
    handle.mutable_value() = t;
  }
}

TGVFM TGVFM::load(const std::string& path) {
  const TensorArchive a = read_archive(path, kMagic);
  const KeyValues kv = KeyValues::parse(a.config_text);
  TGVFM model(read_config(kv, "backbone"), tcfb::read_config(kv, "tcfb"),
              static_cast<std::uint64_t>(kv.integer("seed", 0)));
  model.load_params(path);
  return model;
}

}  // namespace tgvfm::backbone
