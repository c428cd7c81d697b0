// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/harness/dataset.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "tgvfm/core/checkpoint.hpp"
#include "tgvfm/core/errors.hpp"
#include "tgvfm/e2vid/train.hpp"

namespace tgvfm::harness {

namespace fs = std::filesystem;

namespace {

constexpr const char* kCacheMagic = "DSC1";

std::string file_digest(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw IoError("E2VID checkpoint '" + path + "' not found; train one with `tgvfm e2vid-train --out " + path + "`");
  }
  std::ostringstream os;
  os << is.rdbuf();
  return std::to_string(fnv1a(os.str()));
}

std::optional<e2vid::E2VIDModel> open_e2vid(const RunConfig& config) {
  if (config.data.input != InputKind::Reconstruction) return std::nullopt;
  if (config.e2vid.checkpoint == "init") return e2vid::E2VIDModel(e2vid::preset(config.e2vid.preset), config.e2vid.seed);
  if (!fs::exists(config.e2vid.checkpoint)) file_digest(config.e2vid.checkpoint);
  return e2vid::E2VIDModel::load(config.e2vid.checkpoint);
}

Tensor round_f32(Tensor t) {
  for (auto& v : t.vec()) v = static_cast<double>(static_cast<float>(v));
  return t;
}

Sequence make_sequence(const RunConfig& config, std::uint64_t index, const e2vid::SceneSource& source,
                       const e2vid::E2VIDModel* model, const Tensor* cached) {
  const events::SceneSequence scene = source.scene(index);
  Sequence s;
  const int steps = scene.n_frames() - 1;
  std::vector<Tensor> recon;
  if (cached) {
    for (int k = 0; k < steps; ++k) {
      Tensor f(Shape{scene.height(), scene.width()});
      std::copy_n(cached->data() + static_cast<std::size_t>(k) * f.numel(), f.numel(), f.data());
      recon.push_back(std::move(f));
    }
  } else if (model) {
    const auto vox = e2vid::voxelize(scene, config.data.contrast_threshold, config.data.voxel_bins);
    for (auto& f : model->reconstruct(vox.voxels)) recon.push_back(round_f32(std::move(f)));
  }
  for (int k = 0; k < steps; ++k) {
    s.clean.push_back(scene.frames[k + 1]);
    s.input.push_back(recon.empty() ? scene.frames[k + 1] : recon[k]);
    s.labels.push_back(scene.seg_labels[k + 1].labels);
    s.depth.push_back(scene.depth_maps[k + 1]);
  }
  return s;
}

}  // namespace

std::string dataset_key(const RunConfig& config) {
  KeyValues kv = to_kv(config);
  std::string text;
  for (const auto& [k, v] : kv.entries()) {
    if (k.rfind("data.", 0) == 0 && k != "data.cache_dir") text += k + "=" + v + "\n";
  }
  if (config.data.input == InputKind::Reconstruction) {
    text += "e2vid=" + (config.e2vid.checkpoint == "init"
                            ? "init:" + config.e2vid.preset + ":" + std::to_string(config.e2vid.seed)
                            : file_digest(config.e2vid.checkpoint));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  return buf;
}

Dataset build_dataset(const RunConfig& config) {
  config.validate();
  Dataset ds;
  ds.key = dataset_key(config);
  const e2vid::SyntheticSceneSource source(config.data.scene_seed, config.data.scene);
  const bool recon = config.data.input == InputKind::Reconstruction;

  std::optional<TensorArchive> cache;
  fs::path cache_path;
  if (recon && !config.data.cache_dir.empty()) {
    cache_path = fs::path(config.data.cache_dir) / ("dataset-" + ds.key + ".dsc");
    if (fs::exists(cache_path)) cache = read_archive(cache_path.string(), kCacheMagic);
  }
  std::optional<e2vid::E2VIDModel> model;
  if (recon && !cache) model = open_e2vid(config);

  auto split = [&](const std::string& name, std::uint64_t first, int count, std::vector<Sequence>& out) {
    for (int i = 0; i < count; ++i) {
      const std::string tname = name + "/" + std::to_string(i);
      const Tensor* cached = cache ? &cache->find(tname) : nullptr;
      out.push_back(make_sequence(config, first + i, source, model ? &*model : nullptr, cached));
    }
  };
  split("train", 0, config.data.train_sequences, ds.train);
  split("eval", config.data.eval_offset, config.data.eval_sequences, ds.eval);

  if (recon && !cache && !cache_path.empty()) {
    TensorArchive a;
    a.magic = kCacheMagic;
    a.config_text = ds.key;
    a.dtype = TensorDType::F32;
    auto store = [&](const std::string& name, const std::vector<Sequence>& seqs) {
      for (std::size_t i = 0; i < seqs.size(); ++i) {
        const auto& in = seqs[i].input;
        Tensor t(Shape{static_cast<int>(in.size()), in[0].dim(0), in[0].dim(1)});
        for (std::size_t k = 0; k < in.size(); ++k) std::copy_n(in[k].data(), in[k].numel(), t.data() + k * in[k].numel());
        a.tensors.emplace_back(name + "/" + std::to_string(i), std::move(t));
      }
    };
    store("train", ds.train);
    store("eval", ds.eval);
    fs::create_directories(cache_path.parent_path());
    const std::string tmp = cache_path.string() + ".tmp";
    write_archive(tmp, a);
    fs::rename(tmp, cache_path);
  }
  return ds;
}

}  // namespace tgvfm::harness
