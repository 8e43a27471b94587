// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "castline/core.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace castline {

/// Times in seconds of reference speech. The rate is
/// (missed + false_alarm + confusion) / scored_reference.
struct DerBreakdown {
  double scored_reference = 0.0;
  double missed = 0.0;
  double false_alarm = 0.0;
  double confusion = 0.0;

  double rate() const;
  DerBreakdown& operator+=(const DerBreakdown& other);
};

struct DerOptions {
  double collar = 0.25;
  bool include_overlap = true;
  // Score UNKNOWN hypothesis speech as missed instead of as confusion.
  bool unknown_as_miss = false;
};

/// Diarisation error with identities matched literally by character id.
/// The collar is removed around every reference boundary; with
/// include_overlap unset, regions where two or more reference speakers talk
/// at once are removed as well. Throws DataError for an empty reference or
/// when nothing is left to score.
DerBreakdown der_breakdown(std::span<const GTSegment> reference,
                           std::span<const LabelledSegment> hypothesis, const DerOptions& options);

/// der_breakdown(...).rate(), as a fraction.
double der(std::span<const GTSegment> reference, std::span<const LabelledSegment> hypothesis,
           const DerOptions& options);

/// Index of the reference segment with the largest positive overlap with
/// [start, end]; the earlier one on ties.
std::optional<std::size_t> best_reference(double start, double end, std::span<const GTSegment> reference);

/// Overlaps some reference segment and carries the speaker of the best one.
bool is_true_positive(const LabelledSegment& hyp, std::span<const GTSegment> reference);

struct AccuracyCounts {
  long correct = 0;
  long overlapping = 0;
};

AccuracyCounts accuracy_counts(std::span<const LabelledSegment> hypothesis,
                               std::span<const GTSegment> reference);

/// Fraction of reference-overlapping hypothesis segments that are true
/// positives. Throws DataError when no hypothesis segment overlaps.
double accuracy_on_overlap(std::span<const LabelledSegment> hypothesis,
                           std::span<const GTSegment> reference);

struct CharacterCounts {
  long predicted = 0;   // hypothesis segments labelled with the character
  long true_pos = 0;    // ... that are true positives
  long support = 0;     // reference segments of the character
  long recalled = 0;    // ... hit by a correct hypothesis segment
};

using CharacterCountTable = std::map<std::string, CharacterCounts>;

CharacterCountTable character_counts(std::span<const LabelledSegment> hypothesis,
                                     std::span<const GTSegment> reference);
void merge_counts(CharacterCountTable& into, const CharacterCountTable& from);

struct CharacterScore {
  std::string character;
  std::optional<double> precision;  // unset when never predicted
  double recall = 0.0;
  long support = 0;
};

struct PerCharacterResult {
  double ppc = 0.0;
  double rpc = 0.0;
  std::vector<CharacterScore> table;  // reference characters, sorted by id
};

/// Averages run over reference characters only; characters never predicted
/// are left out of the precision mean but count in the recall mean.
PerCharacterResult finalize_per_character(const CharacterCountTable& counts);

PerCharacterResult per_character_pr(std::span<const LabelledSegment> hypothesis,
                                    std::span<const GTSegment> reference);

/// Lowercase, fixed contraction expansions, punctuation stripped except
/// apostrophes inside words, standalone digits 0-9 spelled out.
std::vector<std::string> normalize_text(std::string_view text);

struct EditCounts {
  long substitutions = 0;
  long insertions = 0;
  long deletions = 0;
  long reference_words = 0;

  long errors() const { return substitutions + insertions + deletions; }
  EditCounts& operator+=(const EditCounts& other);
};

/// Levenshtein alignment counts over word sequences.
EditCounts word_edit_counts(std::span<const std::string> reference, std::span<const std::string> hypothesis);

/// Word error rate as a fraction, after normalize_text on both sides.
/// Throws DataError when the normalized reference is empty.
double wer(std::string_view reference, std::string_view hypothesis);

struct MetricsReport {
  std::string name;
  double der = 0.0;               // percent, overlap regions excluded
  double der_with_overlap = 0.0;  // percent; NaN when not scored
  double accuracy = 0.0;          // percent
  double ppc = 0.0;
  double rpc = 0.0;
  double wer = 0.0;  // percent
  std::vector<CharacterScore> per_character;
};

/// Aligned text table: name, DER, DER(O), Acc, Ppc, Rpc, WER.
std::string format_metrics_table(std::span<const MetricsReport> rows);
std::string format_character_table(const MetricsReport& report);

}  // namespace castline
