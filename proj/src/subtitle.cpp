// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#include "castline/subtitle.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace castline {

SubtitleFormat parse_format(std::string_view name) {
  if (name == "srt") return SubtitleFormat::kSrt;
  if (name == "vtt") return SubtitleFormat::kVtt;
  throw std::invalid_argument("unknown subtitle format '" + std::string(name) + "' (expected srt or vtt)");
}

std::int64_t to_millis(double seconds) { return static_cast<std::int64_t>(std::llround(seconds * 1000.0)); }

std::string format_timestamp(std::int64_t ms, SubtitleFormat format) {
  const std::int64_t h = ms / 3600000;
  const std::int64_t m = ms / 60000 % 60;
  const std::int64_t s = ms / 1000 % 60;
  const std::int64_t f = ms % 1000;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%02lld:%02lld:%02lld%c%03lld", static_cast<long long>(h),
                static_cast<long long>(m), static_cast<long long>(s),
                format == SubtitleFormat::kSrt ? ',' : '.', static_cast<long long>(f));
  return buf;
}

namespace {

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t i = 0;
  while (i <= text.size()) {
    std::size_t j = text.find('\n', i);
    if (j == std::string_view::npos) j = text.size();
    std::string line(text.substr(i, j - i));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    i = j + 1;
  }
  return lines;
}

bool digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// HH:MM:SS,mmm (SRT) or [HH:]MM:SS.mmm (VTT).
std::optional<std::int64_t> parse_time(std::string_view t, SubtitleFormat format) {
  const char sep = format == SubtitleFormat::kSrt ? ',' : '.';
  const auto dot = t.rfind(sep);
  if (dot == std::string_view::npos || t.size() - dot - 1 != 3 || !digits(t.substr(dot + 1))) return std::nullopt;
  const std::int64_t frac = std::stoll(std::string(t.substr(dot + 1)));
  std::vector<std::string_view> parts;
  std::string_view clock = t.substr(0, dot);
  std::size_t i = 0;
  while (true) {
    const auto c = clock.find(':', i);
    parts.push_back(clock.substr(i, c == std::string_view::npos ? std::string_view::npos : c - i));
    if (c == std::string_view::npos) break;
    i = c + 1;
  }
  if (parts.size() != 3 && !(format == SubtitleFormat::kVtt && parts.size() == 2)) return std::nullopt;
  std::int64_t total = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    if (!digits(parts[p])) return std::nullopt;
    const std::int64_t v = std::stoll(std::string(parts[p]));
    if (p > 0 && (parts[p].size() != 2 || v >= 60)) return std::nullopt;
    total = total * 60 + v;
  }
  return total * 1000 + frac;
}

bool is_speaker_name(std::string_view name) {
  if (name.empty() || name.front() == ' ' || name.back() == ' ') return false;
  return std::none_of(name.begin(), name.end(), [](unsigned char c) {
    return std::islower(c) || c == ':' || c == '<' || c == '>';
  });
}

Cue split_speaker(std::int64_t start, std::int64_t end, std::string text) {
  Cue cue{start, end, std::nullopt, {}};
  if (text.rfind("<v ", 0) == 0) {
    const auto close = text.find('>');
    if (close != std::string::npos) {
      cue.speaker = text.substr(3, close - 3);
      std::string rest = text.substr(close + 1);
      const std::string end_tag = "</v>";
      if (rest.size() >= end_tag.size() && rest.compare(rest.size() - end_tag.size(), end_tag.size(), end_tag) == 0) {
        rest.resize(rest.size() - end_tag.size());
      }
      cue.text = std::move(rest);
      return cue;
    }
  }
  const auto colon = text.find(": ");
  if (colon != std::string::npos && is_speaker_name(std::string_view(text).substr(0, colon))) {
    cue.speaker = text.substr(0, colon);
    cue.text = text.substr(colon + 2);
  } else {
    cue.text = std::move(text);
  }
  return cue;
}

}  // namespace

std::string emit_subtitles(std::span<const Cue> cues, SubtitleFormat format, const EmitOptions& options) {
  std::string out = format == SubtitleFormat::kVtt ? "WEBVTT\n" : "";
  for (std::size_t i = 0; i < cues.size(); ++i) {
    const Cue& c = cues[i];
    if (i > 0 && c.start_ms < cues[i - 1].start_ms) {
      throw DataError("cue " + std::to_string(i + 1) + " starts before the previous cue");
    }
    if (c.start_ms < 0 || c.end_ms < c.start_ms) {
      throw DataError("cue " + std::to_string(i + 1) + " has invalid times");
    }
    if (c.text.find('\n') != std::string::npos) {
      throw DataError("cue " + std::to_string(i + 1) + " text contains a newline");
    }
    if (format == SubtitleFormat::kVtt || i > 0) out += '\n';
    out += std::to_string(i + 1);
    out += '\n';
    out += format_timestamp(c.start_ms, format);
    out += " --> ";
    out += format_timestamp(c.end_ms, format);
    out += '\n';
    if (c.speaker && format == SubtitleFormat::kVtt && options.voice_spans) {
      out += "<v " + *c.speaker + ">" + c.text;
    } else if (c.speaker) {
      out += upper(*c.speaker) + ": " + c.text;
    } else {
      out += c.text;
    }
    out += '\n';
  }
  return out;
}

std::vector<Cue> parse_subtitles(std::string_view text, SubtitleFormat format) {
  // A UTF-8 byte order mark is tolerated.
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  const auto lines = split_lines(text);
  std::size_t i = 0;
  if (format == SubtitleFormat::kVtt) {
    if (lines.empty() || lines[0].rfind("WEBVTT", 0) != 0) throw DataError("missing WEBVTT header");
    while (i < lines.size() && !lines[i].empty()) ++i;
  }

  std::vector<Cue> cues;
  std::size_t index = 0;
  while (i < lines.size()) {
    while (i < lines.size() && lines[i].empty()) ++i;
    if (i >= lines.size()) break;
    // Block: collect lines until a blank line.
    std::vector<std::string> block;
    while (i < lines.size() && !lines[i].empty()) block.push_back(lines[i++]);
    if (format == SubtitleFormat::kVtt &&
        (block[0].rfind("NOTE", 0) == 0 || block[0] == "STYLE" || block[0] == "REGION")) {
      continue;
    }
    ++index;
    const std::string where = "cue " + std::to_string(index);
    std::size_t b = 0;
    if (block[b].find("-->") == std::string::npos) ++b;  // cue identifier
    if (b >= block.size()) throw DataError(where + ": missing timing line");
    const std::string& timing = block[b];
    const auto arrow = timing.find(" --> ");
    if (arrow == std::string::npos) throw DataError(where + ": malformed timing line");
    std::string end_field = timing.substr(arrow + 5);
    if (const auto sp = end_field.find(' '); sp != std::string::npos) end_field.resize(sp);  // VTT settings
    const auto start = parse_time(timing.substr(0, arrow), format);
    const auto end = parse_time(end_field, format);
    if (!start || !end) throw DataError(where + ": malformed timestamp");
    if (*end < *start) throw DataError(where + ": end precedes start");
    std::string body;
    for (std::size_t k = b + 1; k < block.size(); ++k) {
      if (!body.empty()) body += '\n';
      body += block[k];
    }
    cues.push_back(split_speaker(*start, *end, std::move(body)));
  }
  return cues;
}

std::vector<Cue> cues_from_segments(std::span<const LabelledSegment> segments,
                                    const std::map<std::string, std::string>& display_names) {
  std::vector<Cue> cues;
  cues.reserve(segments.size());
  for (const auto& s : segments) {
    Cue c;
    c.start_ms = to_millis(s.start);
    c.end_ms = to_millis(s.end);
    if (s.label == kUnknown) {
      c.speaker = kUnknown;
    } else {
      auto it = display_names.find(s.label);
      c.speaker = upper(it != display_names.end() ? it->second : s.label);
    }
    c.text = s.text;
    cues.push_back(std::move(c));
  }
  return cues;
}

}  // namespace castline
