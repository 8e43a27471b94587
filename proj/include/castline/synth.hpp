// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace castline {

/// Knobs for a synthetic series. Every segment is drawn from exactly one of
/// three visual situations: single visible speaker (the default),
/// multi-speaker (two heatmap peaks) or off-screen (no peak).
struct SynthConfig {
  std::uint64_t seed = 1;
  std::string series_id = "synth";
  int n_characters = 8;
  int n_episodes = 3;
  int segments_per_episode = 200;
  int voice_dim = 16;
  int visual_dim = 16;
  double sigma_v = 0.02;  // per-component voice noise
  double sigma_f = 0.02;  // per-component face-frame noise
  int grid_rows = 16;
  int grid_cols = 16;
  double heatmap_fps = 5.0;
  double heatmap_noise = 0.2;  // background amplitude in [0, 1)
  double multi_speaker_fraction = 0.0;
  double offscreen_fraction = 0.0;
  double laughter_fraction = 0.0;
  double exemplarless_fraction = 0.0;  // characters never seen on screen
  double short_fraction = 0.0;         // segments under the long cut-off
  double short_noise_multiplier = 1.0;
  double asr_noise = 0.0;  // fraction of timed words replaced by another word

  /// Clean, fully on-screen corpus; the pipeline should recover every label.
  static SynthConfig easy(std::uint64_t seed = 1);
  /// Noisier voices, off-screen and multi-speaker speech, laughter, short
  /// segments with extra voice noise.
  static SynthConfig noisy(std::uint64_t seed = 1);
};

/// Throws std::invalid_argument describing the first impossible setting.
void validate(const SynthConfig& config);

/// Writes series.json plus one directory per episode holding manifest.json,
/// words/laughter/heatmaps/faces/voice feature files, transcript.txt and
/// truth.ndjson. Identical configs produce identical bytes.
std::filesystem::path generate(const SynthConfig& config, const std::filesystem::path& out_dir);

}  // namespace castline
