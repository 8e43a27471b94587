// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "castline/core.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace castline {

struct TranscriptLine {
  std::string speaker;  // character id
  std::string text;
  int line_index = 0;
};

/// Maps transcript speaker names (case-insensitive) to character ids.
using AliasTable = std::map<std::string, std::string>;

/// One `NAME: utterance` turn per line. Blank lines are skipped; a line
/// without a colon or with an unknown speaker name is a DataError naming the
/// line.
std::vector<TranscriptLine> parse_transcript(std::istream& in, const AliasTable& aliases);

/// Lowercased with leading and trailing punctuation removed.
std::string normalize_word(std::string_view word);

struct TranscriptWord {
  std::string word;
  std::string speaker;
};

std::vector<TranscriptWord> transcript_words(std::span<const TranscriptLine> lines);

enum class Move : std::uint8_t { kDiagonal, kTranscriptSkip, kTimedSkip };

/// One step of the alignment path. The step consumes transcript word
/// `transcript` (diagonal or transcript skip) and/or timed word `timed`
/// (diagonal or timed skip).
struct AlignStep {
  Move move = Move::kDiagonal;
  std::size_t transcript = 0;
  std::size_t timed = 0;
};

struct Alignment {
  long cost = 0;
  std::vector<AlignStep> path;
  std::vector<std::optional<std::string>> timed_speakers;  // one per timed word
};

/// Unit-cost DTW between transcript words and timed ASR words: diagonal
/// costs 0 on a normalized match and 1 otherwise, either skip costs 1.
/// Backtracking prefers diagonal, then transcript skip, then timed skip.
/// Timed words reached by a diagonal inherit that transcript word's speaker;
/// skipped timed words take the speaker of the nearest diagonal on the path,
/// the earlier one on ties. Throws DataError if either side is empty.
Alignment dtw_align(std::span<const TranscriptWord> transcript, std::span<const WordToken> timed);

/// Recomputes the cost of a path independently of the DP.
long path_cost(std::span<const AlignStep> path, std::span<const TranscriptWord> transcript,
               std::span<const WordToken> timed);

struct ReviewItem {
  int segment_id = 0;
  std::string reason;
};

struct GroundTruth {
  std::vector<GTSegment> segments;
  std::vector<ReviewItem> review;
};

/// Majority speaker per speech segment (ties: the speaker of the earliest
/// voting word). Segments with no voting word are dropped. Mixed votes and
/// segments with more than 30% unaligned words go to the review list.
GroundTruth words_to_gt_segments(std::span<const std::optional<std::string>> timed_speakers,
                                 std::span<const AlignStep> path,
                                 std::span<const SpeechSegment> segments);

std::string format_review(std::span<const ReviewItem> review);

}  // namespace castline
