// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "castline/core.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace castline {

enum class SubtitleFormat { kSrt, kVtt };

SubtitleFormat parse_format(std::string_view name);

/// Times are whole milliseconds so emitted files never drift.
struct Cue {
  std::int64_t start_ms = 0;
  std::int64_t end_ms = 0;
  std::optional<std::string> speaker;
  std::string text;

  bool operator==(const Cue&) const = default;
};

struct EmitOptions {
  // VTT only: write `<v NAME>text` instead of `NAME: text`.
  bool voice_spans = false;
};

/// Cues numbered from 1, speaker written as an uppercase `NAME: ` prefix.
/// Throws DataError for unsorted cues, negative or inverted times, or text
/// containing a newline.
std::string emit_subtitles(std::span<const Cue> cues, SubtitleFormat format, const EmitOptions& options = {});

/// Reads SRT or WebVTT. A leading `NAME: ` prefix (no lowercase letters in
/// NAME) or a `<v NAME>` span sets the speaker. Throws DataError naming the
/// cue index for malformed cues.
std::vector<Cue> parse_subtitles(std::string_view text, SubtitleFormat format);

std::string format_timestamp(std::int64_t ms, SubtitleFormat format);
std::int64_t to_millis(double seconds);

/// Builds cues from labelled segments, showing each label's display name
/// (UNKNOWN stays UNKNOWN).
std::vector<Cue> cues_from_segments(std::span<const LabelledSegment> segments,
                                    const std::map<std::string, std::string>& display_names);

}  // namespace castline
