// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "castline/config.hpp"
#include "castline/core.hpp"
#include "castline/ingest.hpp"
#include "castline/log.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace castline {

// Stage 1: mine high-precision voice exemplars per character.

/// Survivor counts after each filtering step. `detected` is the raw sentence
/// count before laughter removal; the four tabulated steps start at `vad`.
struct StageYield {
  long detected = 0;
  long vad = 0;
  long av_gate = 0;
  long visual = 0;
  long audio_filter = 0;

  bool monotone() const;
  double percent_of_vad(long count) const;
};

/// Text table: Step | # of exemplars | % of total.
std::string format_yield_table(const StageYield& yield);

/// Drops every segment that overlaps (positive-length intersection) a laughter
/// interval scoring at least `threshold`. Order is preserved.
std::vector<SpeechSegment> filter_laughter(std::span<const SpeechSegment> segments,
                                           std::span<const LaughterInterval> laughter,
                                           double threshold);

/// Element-wise mean of the frames whose timestamp lies in [start, end].
/// Empty when no frame falls inside the segment.
std::optional<Grid> average_heatmap(std::span<const HeatmapFrame> frames,
                                    const SpeechSegment& segment);

/// Maximum filtering over a (2r+1)^2 window followed by greedy non-maximum
/// suppression in Chebyshev distance r. At most `peak_count` peaks are kept,
/// strongest first, and only those strictly above `tau_det` are returned.
/// A plateau contributes its lexicographically smallest cell.
PeakSet detect_peaks(const Grid& heatmap, double tau_det, int peak_count, int nms_radius);

inline bool single_speaker_gate(const PeakSet& peaks) { return peaks.size() == 1; }

struct CharacterMatch {
  std::string character_id;
  double score = 0.0;
};

/// Scores each cast member by the mean cosine similarity between the frame
/// embeddings and its prototype. Returns the best member only when its score
/// exceeds `tau_rec` and is not tied with another member.
std::optional<CharacterMatch> classify_character(std::span<const Vec> frames,
                                                 std::span<const CastEntry> cast,
                                                 double tau_rec);

/// Cast members listed for the episode. Entries with no episode list are
/// treated as appearing everywhere.
std::vector<CastEntry> cast_for_episode(std::span<const CastEntry> cast, const std::string& episode_id);

/// Single-pass k-NN label purification over the pooled records. A record
/// survives when its k nearest neighbours (cosine distance, itself excluded,
/// ties by segment_id then episode_id) all carry its label. Characters with
/// fewer than k records are kept whole.
std::vector<ExemplarRecord> knn_filter(std::span<const ExemplarRecord> records, int k);

struct ExemplarResult {
  std::vector<ExemplarRecord> exemplars;
  std::vector<ExemplarRecord> candidates;  // visually named, before knn_filter
  StageYield yield;
};

/// Runs all four filters over every episode and pools the survivors for the
/// audio filter. Stage counts go through `log`; the yield is read back from it.
/// Throws std::logic_error if the yield is ever non-monotone.
ExemplarResult build_exemplars(std::span<const Episode> episodes, std::span<const CastEntry> cast,
                               const PipelineConfig& config, StageLog* log = nullptr, int jobs = 1);

StageYield yield_from_log(const StageLog& log);

std::string serialize_exemplars(std::span<const ExemplarRecord> records);
std::vector<ExemplarRecord> parse_exemplars(std::istream& in);

}  // namespace castline
