// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "castline/config.hpp"
#include "castline/core.hpp"
#include "castline/ingest.hpp"

#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace castline {

// Stage 2: nearest-centroid naming with an unknown-distance cut-off.

/// Per character: normalize each exemplar, average, renormalize. Characters
/// whose mean vanishes are dropped and reported in `dropped` (when given).
CharacterBank build_centroids(std::span<const ExemplarRecord> exemplars,
                              std::vector<std::string>* dropped = nullptr);

/// Nearest centroid by cosine distance; UNKNOWN when the best distance
/// exceeds `d` or the bank is empty (distance +inf). Distance ties go to the
/// smaller character id.
Assignment assign(std::span<const double> embedding, const CharacterBank& bank, double d,
                  int segment_id = 0);

/// Segments surviving laughter removal, each with its start/end.
std::vector<SpeechSegment> assignable_segments(const Episode& episode, const PipelineConfig& config);

/// One assignment per assignable segment, in segment order. Throws DataError
/// listing every segment lacking a voice embedding.
std::vector<Assignment> assign_episode(const Episode& episode, const CharacterBank& bank,
                                       const PipelineConfig& config);

std::vector<LabelledSegment> label_segments(std::span<const SpeechSegment> segments,
                                            std::span<const Assignment> assignments);

/// Nearest-centroid result before thresholding, with its time span.
struct ScoredSegment {
  double start = 0.0;
  double end = 0.0;
  std::string nearest;  // empty when the bank was empty
  double distance = 0.0;
};

struct CurvePoint {
  double d = 0.0;
  double pocs = 0.0;
  double precision = 1.0;  // 1.0 by convention when nothing is classified
  std::string segment_class;  // "all" or "long"
};

/// One ground-truth-bearing episode worth of scored segments.
struct SweepEpisode {
  std::vector<ScoredSegment> segments;
  std::vector<GTSegment> truth;
};

/// Precision-POCS over a grid of unknown-distance thresholds, for all
/// segments and for segments longer than `long_cutoff`. POCS and precision
/// are pooled over the episodes.
std::vector<CurvePoint> sweep_thresholds(std::span<const SweepEpisode> episodes,
                                         std::span<const double> grid, double long_cutoff);

struct OraclePoint {
  double pocs = 0.0;
  double precision = 1.0;
  bool precision_defined = true;
};

/// The point reached if every segment whose ground-truth speaker has
/// exemplars were named correctly and every other segment left unknown.
OraclePoint oracle_point(std::span<const SweepEpisode> episodes,
                         const std::set<std::string>& exemplar_characters);

std::string serialize_assignments(std::span<const SpeechSegment> segments,
                                  std::span<const Assignment> assignments);
std::vector<std::pair<LabelledSegment, Assignment>> parse_assignments(std::istream& in);

/// Tab-separated: d, pocs, precision, class.
std::string format_curve(std::span<const CurvePoint> curve);

}  // namespace castline
