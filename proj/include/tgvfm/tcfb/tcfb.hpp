// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tgvfm/core/kv.hpp"
#include "tgvfm/core/params.hpp"
#include "tgvfm/tcfb/attention.hpp"
#include "tgvfm/tcfb/memory_bank.hpp"

namespace tgvfm::tcfb {

enum class Stage { LTA, Cross, Window };

struct TCFBConfig {
  int k = 3;      ///< memory window
  int delta = 1;  ///< window radius
  int d = 0;      ///< projection dim; 0 means d = C
  /// 1-based block indices after which a site sits; empty means evenly spaced.
  std::vector<int> insertion_sites;
  bool share_params = false;
  bool use_lta = true;
  bool use_dsa = true;   ///< cross + window attention
  bool use_dfgm = true;  ///< guidance fusion into LTA and window history
  std::vector<Stage> order{Stage::LTA, Stage::Cross, Stage::Window};
  int ffn_mult = 2;

  /// Throws ConfigError when k < 1, delta < 0, d < 0, or the order is not a
  /// permutation of the three stages.
  void validate() const;
};

/// Writes the fields as `<prefix>.<field>` keys.
void write_config(KeyValues& kv, const std::string& prefix, const TCFBConfig& config);
/// Missing keys keep their defaults; the result is validated.
TCFBConfig read_config(const KeyValues& kv, const std::string& prefix);

std::string stage_name(Stage s);
Stage parse_stage(const std::string& name);

/// Shapes one site works with.
struct SiteShape {
  int channels = 0;          ///< token width C
  Grid grid;                 ///< token grid
  int guidance_channels = 0; ///< C_dec of the guidance source
  int guidance_patch = 1;    ///< embedder kernel = stride

  friend bool operator==(const SiteShape&, const SiteShape&) = default;
};

struct FFNParams {
  Var ln_gamma, ln_beta;
  Var w1, b1;  ///< [C, mult*C], [mult*C]
  Var w2, b2;  ///< [mult*C, C], [C]
};

struct TCFBParams {
  AttentionParams lta, cross, window;
  FFNParams ffn;
  Var embed_w, embed_b;  ///< [C, C_dec, p, p], [C]
  Var out_w, out_b;      ///< zero-initialised [C, C], [C]
};

/// Registers one site's tensors under `prefix` ("tcfb.site0"), initialised
/// from (seed, name).
TCFBParams make_site_params(ParamStore& store, const std::string& prefix, const SiteShape& shape,
                            const TCFBConfig& config, std::uint64_t seed);

/// Site params for all sites ("tcfb.site<i>"); with sharing a single
/// "tcfb.shared" instance is referenced by every site. Throws ConfigError when
/// sharing shape-incompatible sites.
std::vector<TCFBParams> make_all_sites(ParamStore& store, const std::vector<SiteShape>& sites,
                                       const TCFBConfig& config, std::uint64_t seed);

/// Learnable scalars of the TCFB parameters for `n_sites` copies of `shape`,
/// counted by instantiating and enumerating distinct tensors.
std::size_t shared_param_count(int n_sites, bool share, const SiteShape& shape, const TCFBConfig& config = {});

/// Strided non-overlapping convolution of the guidance source to tokens [N, C].
Var embed_guidance(const Tensor& deep, const TCFBParams& p);

/// f~_i = shallow_i + embed(deep_i). Throws ContractError on length or shape mismatch.
std::vector<Var> dfgm_fuse(const std::vector<Var>& shallow, const std::vector<Tensor>& deep, const TCFBParams& p);

Var ffn_forward(const Var& x, const FFNParams& p);
Var zero_init_linear(const Var& x, const Var& w, const Var& b);

struct TCFBTrace {
  Tensor lta_weights;
  Tensor cross_weights;
  Tensor window_weights;
};

/// Delta to add to the host block output. Does not modify the bank; the
/// caller pushes (f_in, F_t) once the frame's deep feature exists.
Var tcfb_forward(const Var& f_in, const MemoryBank& bank, const TCFBParams& p, const TCFBConfig& config, Grid grid,
                 TCFBTrace* trace = nullptr);

}  // namespace tgvfm::tcfb
