// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tgvfm/core/kv.hpp"
#include "tgvfm/core/params.hpp"
#include "tgvfm/tcfb/tcfb.hpp"

namespace tgvfm::backbone {

struct BackboneConfig {
  int n_blocks = 6;
  int channels = 64;  ///< token width C
  int patch_size = 8;
  int n_heads = 4;
  int mlp_mult = 2;
  int decoder_channels = 32;  ///< C_dec of the guidance feature F_t
  int n_classes = 4;
  int image_height = 64;
  int image_width = 64;
  /// 0 builds the plain backbone without any TCFB.
  int n_tcfb_sites = 2;

  /// Throws ConfigError on non-positive sizes, a resolution not divisible by
  /// the patch, C not divisible by the heads, or sites that cannot be spaced.
  void validate() const;
  tcfb::Grid grid() const { return {image_height / patch_size, image_width / patch_size}; }
};

void write_config(KeyValues& kv, const std::string& prefix, const BackboneConfig& config);
BackboneConfig read_config(const KeyValues& kv, const std::string& prefix);

/// 1-based block indices followed by a TCFB site. An explicit list in the
/// TCFB config wins; otherwise sites are evenly spaced at {s, 2s, ...} with
/// s = n_blocks / n_sites.
std::vector<int> site_blocks(const BackboneConfig& config, const tcfb::TCFBConfig& tcfb_config);

/// Per-stream temporal state: one bank per site.
struct BankSet {
  std::vector<tcfb::MemoryBank> banks;

  bool all_empty() const;
};

BankSet reset_banks(const BackboneConfig& config, const tcfb::TCFBConfig& tcfb_config);

struct ModelOutput {
  Var seg_logits;      ///< [n_classes, H, W]
  Var depth;           ///< [H, W], strictly positive
  Tensor deep_feature; ///< F_t, [C_dec, 2h, 2w]
};

struct ViTBlockParams {
  Var ln1_g, ln1_b, w_qkv, b_qkv, w_proj, b_proj;
  Var ln2_g, ln2_b, w1, b1, w2, b2;
};

class TGVFM {
 public:
  /// Base parameters are seeded by name, so a model with and without TCFB
  /// built from the same seed shares identical base weights.
  TGVFM(BackboneConfig config, tcfb::TCFBConfig tcfb_config, std::uint64_t seed);

  const BackboneConfig& config() const { return config_; }
  const tcfb::TCFBConfig& tcfb_config() const { return tcfb_config_; }
  const std::vector<int>& sites() const { return sites_; }
  bool has_tcfb() const { return !sites_.empty(); }

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  /// TCFB tensors only.
  ParamStore tcfb_params() const;

  BankSet reset_banks() const;

  /// One frame [H, W] (or [1, H, W]) through the network. Each site adds its
  /// delta to its block output; once the heads ran, (f_in, F_t) is pushed into
  /// that site's bank so that the next frame sees this frame's history.
  ModelOutput forward_frame(const Tensor& gray, BankSet& banks) const;

  void save(const std::string& path) const;
  /// Restores parameters saved by save(); throws IoError on a config or
  /// tensor mismatch.
  void load_params(const std::string& path);
  static TGVFM load(const std::string& path);

  /// Config text stored in checkpoints.
  std::string config_text() const;

 private:
  Var vit_block(const Var& x, const ViTBlockParams& p) const;

  BackboneConfig config_;
  tcfb::TCFBConfig tcfb_config_;
  std::uint64_t seed_;
  std::vector<int> sites_;
  ParamStore params_;
  Var patch_w_, patch_b_, pos_;
  std::vector<ViTBlockParams> blocks_;
  std::vector<tcfb::TCFBParams> site_params_;
  Var neck_ln_g_, neck_ln_b_, neck_w_, neck_b_;
  Var seg_w_, seg_b_, depth_w_, depth_b_;
};

}  // namespace tgvfm::backbone
