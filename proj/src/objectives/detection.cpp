// Copyright (c) 2026, The TGVFM-lite Authors
// SPDX-License-Identifier: Apache-2.0

#include "tgvfm/objectives/detection.hpp"

#include "tgvfm/core/errors.hpp"
#include "tgvfm/core/ops.hpp"

namespace tgvfm::objectives {

DetLosses det_stage_losses(const std::vector<DetStagePrediction>& stages, const std::vector<int>& gt_labels,
                           const Tensor& gt_boxes, const DetectionLossConfig& config) {
  if (config.n_stages < 1) throw ConfigError("detection needs at least one cascade stage");
  if (static_cast<int>(stages.size()) != config.n_stages) {
    throw ConfigError("expected " + std::to_string(config.n_stages) + " cascade stages, got " +
                      std::to_string(stages.size()));
  }
  const int m = static_cast<int>(gt_labels.size());
  DetLosses out;
  out.total = Var(Tensor::scalar(0.0));
  if (m == 0) {
    for (int k = 0; k < config.n_stages; ++k) {
      out.cls.emplace_back(Tensor::scalar(0.0));
      out.box.emplace_back(Tensor::scalar(0.0));
    }
    return out;
  }
  if (gt_boxes.shape() != Shape{m, 4}) throw ContractError("gt boxes must be [M, 4]");

  // Per-proposal likelihood of its label: q = y ? p : 1 - p, as q = s * p + c.
  Tensor sign(Shape{m}), offset(Shape{m});
  std::vector<std::size_t> pos_entries;
  std::vector<double> targets;
  for (int j = 0; j < m; ++j) {
    if (gt_labels[j] != 0 && gt_labels[j] != 1) throw ContractError("detection labels must be binary");
    sign[j] = gt_labels[j] == 1 ? 1.0 : -1.0;
    offset[j] = gt_labels[j] == 1 ? 0.0 : 1.0;
    if (gt_labels[j] == 1) {
      for (int c = 0; c < 4; ++c) {
        pos_entries.push_back(static_cast<std::size_t>(j) * 4 + c);
        targets.push_back(gt_boxes.at(j, c));
      }
    }
  }
  const int npos = static_cast<int>(targets.size());
  for (const auto& st : stages) {
    if (st.probs.shape() != Shape{m} || st.boxes.shape() != Shape{m, 4}) {
      throw ContractError("stage predictions must be [M] probabilities and [M, 4] boxes");
    }
    Var q = ops::add(ops::mul(st.probs, Var(sign)), Var(offset));
    Var cls = ops::scale(ops::sum(ops::log(q)), -1.0);
    Var box = npos == 0 ? Var(Tensor::scalar(0.0))
                        : ops::sum(ops::abs(ops::sub(ops::gather(st.boxes, pos_entries),
                                                     Var(Tensor(Shape{npos}, targets)))));
    out.cls.push_back(cls);
    out.box.push_back(box);
    out.total = ops::add(out.total, ops::add(cls, box));
  }
  return out;
}

std::vector<Box> filter_pseudo_boxes(const std::vector<ScoredBox>& boxes, const DetectionLossConfig& config) {
  std::vector<Box> kept;
  for (const auto& b : boxes)
    if (b.score > config.confidence_threshold) kept.push_back(b.box);
  return kept;
}

}  // namespace tgvfm::objectives
