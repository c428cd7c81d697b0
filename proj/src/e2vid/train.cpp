// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/e2vid/train.hpp"

#include <algorithm>
#include <filesystem>
#include <random>

#include "tgvfm/core/errors.hpp"
#include "tgvfm/core/ops.hpp"
#include "tgvfm/core/optim.hpp"
#include "tgvfm/e2vid/ssim.hpp"
#include "tgvfm/events/scene_io.hpp"
#include "tgvfm/events/simulator.hpp"

namespace tgvfm::e2vid {

namespace fs = std::filesystem;

events::SceneSequence SyntheticSceneSource::scene(std::uint64_t index) const {
  return events::generate_scene(seed_ * 0x100000001b3ULL + index, config_);
}

ArchiveSceneSource::ArchiveSceneSource(const std::string& dir) {
  if (fs::exists(fs::path(dir) / "manifest.json")) {
    scenes_.push_back(events::read_scene_archive(dir));
    return;
  }
  if (!fs::is_directory(dir)) throw IoError("scene directory '" + dir + "' does not exist");
  std::vector<fs::path> subdirs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && fs::exists(e.path() / "manifest.json")) subdirs.push_back(e.path());
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& p : subdirs) scenes_.push_back(events::read_scene_archive(p.string()));
  if (scenes_.empty()) throw IoError("no scene archives under '" + dir + "'");
}

events::SceneSequence ArchiveSceneSource::scene(std::uint64_t index) const { return scenes_[index % scenes_.size()]; }

std::unique_ptr<SceneSource> open_scene_source(const std::string& where, const events::SceneConfig& synthetic_config) {
  const std::string prefix = "synthetic";
  if (where.rfind(prefix, 0) == 0) {
    std::uint64_t seed = 0;
    if (where.size() > prefix.size()) {
      if (where[prefix.size()] != ':') throw ConfigError("expected synthetic[:seed], got '" + where + "'");
      seed = std::stoull(where.substr(prefix.size() + 1));
    }
    return std::make_unique<SyntheticSceneSource>(seed, synthetic_config);
  }
  return std::make_unique<ArchiveSceneSource>(where);
}

VoxelSequence voxelize(const events::SceneSequence& scene, double contrast_threshold, int bins) {
  VoxelSequence out;
  const auto stream = events::simulate_events(scene, contrast_threshold);
  out.voxels = events::encode_frame_windows(stream, scene, bins);
  out.frames.assign(scene.frames.begin() + 1, scene.frames.end());
  return out;
}

namespace {

Tensor crop(const Tensor& t, int y0, int x0, int size) {
  const bool planar = t.rank() == 2;
  const int c = planar ? 1 : t.dim(0), h = planar ? t.dim(0) : t.dim(1), w = planar ? t.dim(1) : t.dim(2);
  Tensor out(planar ? Shape{size, size} : Shape{c, size, size});
  for (int ch = 0; ch < c; ++ch)
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        out[(static_cast<std::size_t>(ch) * size + y) * size + x] =
            t[(static_cast<std::size_t>(ch) * h + y0 + y) * w + x0 + x];
  return out;
}

}  // namespace

TrainLog train(E2VIDModel& model, const SceneSource& source, const TrainOptions& opts,
               const std::function<void(int, double)>& on_log) {
  if (opts.batch < 1 || opts.unroll < 1 || opts.iterations < 0) throw ConfigError("invalid E2VID training options");
  Adam adam(model.params(), {.lr = opts.lr});
  TrainLog log;
  for (int it = 0; it < opts.iterations; ++it) {
    adam.zero_grad();
    double total = 0.0;
    for (int b = 0; b < opts.batch; ++b) {
      const std::uint64_t index = static_cast<std::uint64_t>(it) * opts.batch + b;
      VoxelSequence seq = voxelize(source.scene(index), opts.contrast_threshold, model.config().in_channels);
      const int steps = std::min<int>(opts.unroll, static_cast<int>(seq.voxels.size()));
      if (steps == 0) throw ConfigError("training scenes need at least two frames");
      int h = seq.frames[0].dim(0), w = seq.frames[0].dim(1);
      int y0 = 0, x0 = 0;
      if (opts.crop > 0 && opts.crop < std::min(h, w)) {
        std::mt19937_64 rng(opts.seed * 1000003ULL + index);
        y0 = std::uniform_int_distribution<int>(0, h - opts.crop)(rng);
        x0 = std::uniform_int_distribution<int>(0, w - opts.crop)(rng);
        h = w = opts.crop;
      }
      RecurrentState state = model.init_state(h, w);
      Var loss;
      for (int k = 0; k < steps; ++k) {
        Tensor vox = seq.voxels[k].bins, target = seq.frames[k];
        if (h != target.dim(0) || w != target.dim(1)) {
          vox = crop(vox, y0, x0, h);
          target = crop(target, y0, x0, h);
        }
        auto s = model.step(Var(std::move(vox)), state);
        state = std::move(s.state);
        Var l = reconstruction_loss(s.frame, Var(std::move(target)));
        loss = loss.defined() ? ops::add(loss, l) : l;
      }
      loss = ops::scale(loss, 1.0 / (steps * opts.batch));
      total += loss.value().item();
      backward(loss);
    }
    adam.step();
    log.losses.push_back(total);
    if (on_log && opts.log_every > 0 && ((it + 1) % opts.log_every == 0 || it + 1 == opts.iterations)) {
      on_log(it + 1, total);
    }
  }
  return log;
}

EvalResult evaluate(const E2VIDModel& model, const SceneSource& source, std::uint64_t first_index, int count,
                    double contrast_threshold) {
  EvalResult r;
  double with_state = 0.0, without_state = 0.0;
  for (int i = 0; i < count; ++i) {
    VoxelSequence seq = voxelize(source.scene(first_index + i), contrast_threshold, model.config().in_channels);
    const auto rec = model.reconstruct(seq.voxels, false);
    const auto rec_reset = model.reconstruct(seq.voxels, true);
    double a = 0.0, b = 0.0;
    for (std::size_t k = 0; k < rec.size(); ++k) {
      a += ssim(rec[k], seq.frames[k]);
      b += ssim(rec_reset[k], seq.frames[k]);
    }
    with_state += a / rec.size();
    without_state += b / rec.size();
    r.frames += static_cast<int>(rec.size());
    ++r.sequences;
  }
  if (count > 0) {
    r.ssim = with_state / count;
    r.ssim_reset_state = without_state / count;
  }
  return r;
}

}  // namespace tgvfm::e2vid
