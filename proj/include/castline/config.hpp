// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace castline {

/// Thresholds and knobs for both stages and evaluation. Defaults are the
/// values the method was published with; see README for the extensions.
struct PipelineConfig {
  double laughter_threshold = 0.8;
  double tau_det = 0.7;
  int peak_count = 4;
  // Unset means max(1, floor(min(H, W) / 8)) for the grid at hand.
  std::optional<int> nms_radius;
  double tau_rec = 0.85;
  int knn_k = 5;
  // Placeholder; recalibrate per embedding model with `castline sweep`.
  double unknown_distance_d = 0.4;
  double der_collar = 0.25;
  double long_segment_cutoff = 2.0;
  int voice_dim = 0;   // 0: take from manifests
  int visual_dim = 0;  // 0: take from manifests

  // Sentence segmentation.
  double max_word_gap = 3.0;
  std::vector<std::string> abbreviations = {"mr.", "mrs.", "dr.", "ms.", "st.", "jr.", "sr."};

  // Evaluation.
  bool unknown_as_miss = false;
  int sweep_points = 50;
  double sweep_max = 2.0;

  // Subtitles.
  bool vtt_voice_spans = false;

  int nms_radius_for(int rows, int cols) const;
  std::vector<double> sweep_grid() const;
};

/// Throws std::invalid_argument naming the offending field.
void validate(const PipelineConfig& config);

/// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig pipeline_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const PipelineConfig& config);

}  // namespace castline
