// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/tcfb/tcfb.hpp"

#include <algorithm>

#include "tgvfm/core/errors.hpp"
#include "tgvfm/core/ops.hpp"

namespace tgvfm::tcfb {

void TCFBConfig::validate() const {
  if (k < 1) throw ConfigError("tcfb.k must be >= 1");
  if (delta < 0) throw ConfigError("tcfb.delta must be >= 0");
  if (d < 0) throw ConfigError("tcfb.d must be >= 1 (or 0 for d = C)");
  if (ffn_mult < 1) throw ConfigError("tcfb.ffn_mult must be >= 1");
  std::vector<Stage> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  if (sorted != std::vector<Stage>{Stage::LTA, Stage::Cross, Stage::Window}) {
    throw ConfigError("tcfb.order must be a permutation of lta, cross, window");
  }
}

std::string stage_name(Stage s) {
  switch (s) {
    case Stage::LTA: return "lta";
    case Stage::Cross: return "cross";
    case Stage::Window: return "window";
  }
  return "?";
}

Stage parse_stage(const std::string& name) {
  if (name == "lta") return Stage::LTA;
  if (name == "cross") return Stage::Cross;
  if (name == "window") return Stage::Window;
  throw ConfigError("unknown TCFB stage '" + name + "'");
}

void write_config(KeyValues& kv, const std::string& prefix, const TCFBConfig& c) {
  auto key = [&](const char* f) { return prefix + "." + f; };
  kv.set(key("k"), std::to_string(c.k));
  kv.set(key("delta"), std::to_string(c.delta));
  kv.set(key("d"), std::to_string(c.d));
  kv.set(key("insertion_sites"), join_ints(c.insertion_sites));
  kv.set(key("share_params"), c.share_params ? "true" : "false");
  kv.set(key("use_lta"), c.use_lta ? "true" : "false");
  kv.set(key("use_dsa"), c.use_dsa ? "true" : "false");
  kv.set(key("use_dfgm"), c.use_dfgm ? "true" : "false");
  std::string order;
  for (Stage s : c.order) order += (order.empty() ? "" : ",") + stage_name(s);
  kv.set(key("order"), order);
  kv.set(key("ffn_mult"), std::to_string(c.ffn_mult));
}

TCFBConfig read_config(const KeyValues& kv, const std::string& prefix) {
  auto key = [&](const char* f) { return prefix + "." + f; };
  TCFBConfig c;
  c.k = static_cast<int>(kv.integer(key("k"), c.k));
  c.delta = static_cast<int>(kv.integer(key("delta"), c.delta));
  c.d = static_cast<int>(kv.integer(key("d"), c.d));
  c.insertion_sites = kv.int_list(key("insertion_sites"), c.insertion_sites);
  c.share_params = kv.flag(key("share_params"), c.share_params);
  c.use_lta = kv.flag(key("use_lta"), c.use_lta);
  c.use_dsa = kv.flag(key("use_dsa"), c.use_dsa);
  c.use_dfgm = kv.flag(key("use_dfgm"), c.use_dfgm);
  if (kv.has(key("order"))) {
    c.order.clear();
    std::string rest = kv.get(key("order"));
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      const std::size_t comma = std::min(rest.find(',', pos), rest.size());
      c.order.push_back(parse_stage(rest.substr(pos, comma - pos)));
      pos = comma + 1;
    }
  }
  c.ffn_mult = static_cast<int>(kv.integer(key("ffn_mult"), c.ffn_mult));
  c.validate();
  return c;
}

TCFBParams make_site_params(ParamStore& store, const std::string& prefix, const SiteShape& shape,
                            const TCFBConfig& config, std::uint64_t seed) {
  config.validate();
  const int c = shape.channels, d = config.d > 0 ? config.d : c, hidden = config.ffn_mult * c;
  const int cd = shape.guidance_channels, pk = shape.guidance_patch;
  if (c < 1 || cd < 1 || pk < 1) throw ConfigError("invalid TCFB site shape");
  auto xavier = [&](const std::string& name, Shape s, int fan_in, int fan_out) {
    auto rng = rng_for(seed, prefix + "." + name);
    return store.add(prefix + "." + name, init::xavier(std::move(s), fan_in, fan_out, rng));
  };
  auto attention = [&](const std::string& name) {
    return AttentionParams{xavier(name + ".wq", {c, d}, c, d), xavier(name + ".wk", {c, d}, c, d),
                           xavier(name + ".wv", {c, d}, c, d), xavier(name + ".wo", {d, c}, d, c)};
  };
  TCFBParams p;
  p.lta = attention("lta");
  p.cross = attention("cross");
  p.window = attention("window");
  p.ffn.ln_gamma = store.add(prefix + ".ffn.ln_gamma", init::constant({c}, 1.0));
  p.ffn.ln_beta = store.add(prefix + ".ffn.ln_beta", init::zeros({c}));
  p.ffn.w1 = xavier("ffn.w1", {c, hidden}, c, hidden);
  p.ffn.b1 = store.add(prefix + ".ffn.b1", init::zeros({hidden}));
  p.ffn.w2 = xavier("ffn.w2", {hidden, c}, hidden, c);
  p.ffn.b2 = store.add(prefix + ".ffn.b2", init::zeros({c}));
  p.embed_w = xavier("embed.w", {c, cd, pk, pk}, cd * pk * pk, c);
  p.embed_b = store.add(prefix + ".embed.b", init::zeros({c}));
  p.out_w = store.add(prefix + ".out.w", init::zeros({c, c}));
  p.out_b = store.add(prefix + ".out.b", init::zeros({c}));
  return p;
}

std::vector<TCFBParams> make_all_sites(ParamStore& store, const std::vector<SiteShape>& sites,
                                       const TCFBConfig& config, std::uint64_t seed) {
  std::vector<TCFBParams> out;
  if (sites.empty()) return out;
  if (config.share_params) {
    for (const auto& s : sites) {
      if (!(s == sites.front())) throw ConfigError("cannot share TCFB parameters across shape-incompatible sites");
    }
    const TCFBParams shared = make_site_params(store, "tcfb.shared", sites.front(), config, seed);
    out.assign(sites.size(), shared);
    return out;
  }
  for (std::size_t i = 0; i < sites.size(); ++i) {
    out.push_back(make_site_params(store, "tcfb.site" + std::to_string(i), sites[i], config, seed));
  }
  return out;
}

std::size_t shared_param_count(int n_sites, bool share, const SiteShape& shape, const TCFBConfig& config) {
  if (n_sites < 1) throw ConfigError("need at least one TCFB site");
  TCFBConfig c = config;
  c.share_params = share;
  ParamStore store;
  make_all_sites(store, std::vector<SiteShape>(n_sites, shape), c, 0);
  return store.scalar_count();
}

Var embed_guidance(const Tensor& deep, const TCFBParams& p) {
  const int stride = p.embed_w.dim(2);
  return map_to_tokens(ops::conv2d(Var(deep), p.embed_w, p.embed_b, stride, 0));
}

std::vector<Var> dfgm_fuse(const std::vector<Var>& shallow, const std::vector<Tensor>& deep, const TCFBParams& p) {
  if (shallow.size() != deep.size()) throw ContractError("dfgm_fuse: history lengths differ");
  std::vector<Var> fused;
  for (std::size_t i = 0; i < shallow.size(); ++i) {
    const Var g = embed_guidance(deep[i], p);
    if (g.shape() != shallow[i].shape()) {
      throw ContractError("dfgm_fuse: embedded guidance " + shape_str(g.shape()) + " does not match tokens " +
                          shape_str(shallow[i].shape()));
    }
    fused.push_back(ops::add(shallow[i], g));
  }
  return fused;
}

Var ffn_forward(const Var& x, const FFNParams& p) {
  const Var h = ops::gelu(ops::linear(ops::layer_norm(x, p.ln_gamma, p.ln_beta), p.w1, p.b1));
  return ops::add(x, ops::linear(h, p.w2, p.b2));
}

Var zero_init_linear(const Var& x, const Var& w, const Var& b) { return ops::linear(x, w, b); }

Var tcfb_forward(const Var& f_in, const MemoryBank& bank, const TCFBParams& p, const TCFBConfig& config, Grid grid,
                 TCFBTrace* trace) {
  if (f_in.dim(0) != grid.tokens()) throw ContractError("tcfb: token count does not match grid");
  std::vector<Var> shallow;
  std::vector<Tensor> deep;
  for (int i = 0; i < bank.size(); ++i) {
    shallow.emplace_back(bank.at(i).shallow);
    deep.push_back(bank.at(i).deep);
  }
  const std::vector<Var> hist = config.use_dfgm ? dfgm_fuse(shallow, deep, p) : shallow;
  const Var prev_raw = shallow.empty() ? Var() : shallow.front();
  const Var prev_fused = hist.empty() ? Var() : hist.front();

  Var x = f_in;
  for (Stage s : config.order) {
    switch (s) {
      case Stage::LTA:
        if (config.use_lta) x = lta_forward(x, hist, p.lta, trace ? &trace->lta_weights : nullptr);
        break;
      case Stage::Cross:
        if (config.use_dsa) x = cross_attention_forward(x, prev_raw, p.cross, trace ? &trace->cross_weights : nullptr);
        break;
      case Stage::Window:
        if (config.use_dsa) {
          x = window_attention_forward(x, prev_fused, grid, config.delta, p.window,
                                       trace ? &trace->window_weights : nullptr);
        }
        break;
    }
  }
  return zero_init_linear(ffn_forward(x, p.ffn), p.out_w, p.out_b);
}

}  // namespace tgvfm::tcfb
