// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#include "castline/aligner.hpp"

#include <algorithm>
#include <cctype>
#include <istream>

namespace castline {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

std::vector<TranscriptLine> parse_transcript(std::istream& in, const AliasTable& aliases) {
  AliasTable folded;
  for (const auto& [name, id] : aliases) folded[upper(trim(name))] = id;

  std::vector<TranscriptLine> lines;
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (trim(raw).empty()) continue;
    const auto colon = raw.find(':');
    if (colon == std::string::npos) {
      throw DataError("transcript line " + std::to_string(number) + ": expected 'NAME: text'");
    }
    const std::string name = upper(trim(std::string_view(raw).substr(0, colon)));
    const std::string text = trim(std::string_view(raw).substr(colon + 1));
    auto it = folded.find(name);
    if (it == folded.end()) {
      throw DataError("transcript line " + std::to_string(number) + ": unknown speaker '" + name + "'");
    }
    if (text.empty()) throw DataError("transcript line " + std::to_string(number) + ": empty utterance");
    lines.push_back({it->second, text, static_cast<int>(lines.size())});
  }
  return lines;
}

std::string normalize_word(std::string_view word) {
  std::size_t b = 0;
  std::size_t e = word.size();
  auto edge = [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isspace(u) || (u < 0x80 && std::ispunct(u));
  };
  while (b < e && edge(word[b])) ++b;
  while (e > b && edge(word[e - 1])) --e;
  std::string out(word.substr(b, e - b));
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<TranscriptWord> transcript_words(std::span<const TranscriptLine> lines) {
  std::vector<TranscriptWord> out;
  for (const auto& line : lines) {
    std::size_t i = 0;
    const std::string& t = line.text;
    while (i < t.size()) {
      while (i < t.size() && std::isspace(static_cast<unsigned char>(t[i]))) ++i;
      std::size_t j = i;
      while (j < t.size() && !std::isspace(static_cast<unsigned char>(t[j]))) ++j;
      if (j > i) out.push_back({t.substr(i, j - i), line.speaker});
      i = j;
    }
  }
  return out;
}

Alignment dtw_align(std::span<const TranscriptWord> transcript, std::span<const WordToken> timed) {
  if (transcript.empty() || timed.empty()) throw DataError("DTW alignment needs two non-empty sequences");
  const std::size_t m = transcript.size();
  const std::size_t n = timed.size();

  std::vector<std::string> a(m);
  std::vector<std::string> b(n);
  for (std::size_t i = 0; i < m; ++i) a[i] = normalize_word(transcript[i].word);
  for (std::size_t j = 0; j < n; ++j) b[j] = normalize_word(timed[j].text);

  // Rolling cost rows; the full table only stores the chosen move per cell.
  std::vector<Move> back((m + 1) * (n + 1), Move::kDiagonal);
  auto at = [n](std::size_t i, std::size_t j) { return i * (n + 1) + j; };
  std::vector<long> prev(n + 1);
  std::vector<long> cur(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    prev[j] = static_cast<long>(j);
    if (j > 0) back[at(0, j)] = Move::kTimedSkip;
  }
  for (std::size_t i = 1; i <= m; ++i) {
    cur[0] = static_cast<long>(i);
    back[at(i, 0)] = Move::kTranscriptSkip;
    for (std::size_t j = 1; j <= n; ++j) {
      const long diag = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      const long skip_transcript = prev[j] + 1;
      const long skip_timed = cur[j - 1] + 1;
      long best = diag;
      Move move = Move::kDiagonal;
      if (skip_transcript < best) {
        best = skip_transcript;
        move = Move::kTranscriptSkip;
      }
      if (skip_timed < best) {
        best = skip_timed;
        move = Move::kTimedSkip;
      }
      cur[j] = best;
      back[at(i, j)] = move;
    }
    std::swap(prev, cur);
  }

  Alignment out;
  out.cost = prev[n];
  std::size_t i = m;
  std::size_t j = n;
  while (i > 0 || j > 0) {
    const Move move = back[at(i, j)];
    switch (move) {
      case Move::kDiagonal:
        --i;
        --j;
        break;
      case Move::kTranscriptSkip:
        --i;
        break;
      case Move::kTimedSkip:
        --j;
        break;
    }
    out.path.push_back({move, i, j});
  }
  std::reverse(out.path.begin(), out.path.end());

  std::vector<std::size_t> diagonals;
  for (std::size_t p = 0; p < out.path.size(); ++p) {
    if (out.path[p].move == Move::kDiagonal) diagonals.push_back(p);
  }
  out.timed_speakers.assign(n, std::nullopt);
  for (std::size_t p = 0; p < out.path.size(); ++p) {
    const AlignStep& step = out.path[p];
    if (step.move == Move::kDiagonal) {
      out.timed_speakers[step.timed] = transcript[step.transcript].speaker;
    } else if (step.move == Move::kTimedSkip && !diagonals.empty()) {
      auto after = std::lower_bound(diagonals.begin(), diagonals.end(), p);
      std::size_t nearest;
      if (after == diagonals.end()) {
        nearest = diagonals.back();
      } else if (after == diagonals.begin()) {
        nearest = *after;
      } else {
        const std::size_t before = *(after - 1);
        nearest = (p - before <= *after - p) ? before : *after;
      }
      out.timed_speakers[step.timed] = transcript[out.path[nearest].transcript].speaker;
    }
  }
  return out;
}

long path_cost(std::span<const AlignStep> path, std::span<const TranscriptWord> transcript,
               std::span<const WordToken> timed) {
  long cost = 0;
  for (const auto& s : path) {
    if (s.move == Move::kDiagonal) {
      cost += normalize_word(transcript[s.transcript].word) == normalize_word(timed[s.timed].text) ? 0 : 1;
    } else {
      cost += 1;
    }
  }
  return cost;
}

GroundTruth words_to_gt_segments(std::span<const std::optional<std::string>> timed_speakers,
                                 std::span<const AlignStep> path, std::span<const SpeechSegment> segments) {
  std::vector<bool> skipped(timed_speakers.size(), false);
  for (const auto& s : path) {
    if (s.move == Move::kTimedSkip && s.timed < skipped.size()) skipped[s.timed] = true;
  }
  GroundTruth gt;
  for (const auto& seg : segments) {
    // Vote order follows first appearance so ties resolve to the earliest word.
    std::vector<std::pair<std::string, int>> votes;
    std::size_t unaligned = 0;
    for (std::size_t w = seg.word_begin; w < seg.word_end && w < timed_speakers.size(); ++w) {
      if (skipped[w]) ++unaligned;
      if (!timed_speakers[w]) continue;
      auto it = std::find_if(votes.begin(), votes.end(), [&](const auto& v) { return v.first == *timed_speakers[w]; });
      if (it == votes.end()) votes.emplace_back(*timed_speakers[w], 1);
      else ++it->second;
    }
    if (votes.empty()) {
      gt.review.push_back({seg.id, "dropped: no aligned words"});
      continue;
    }
    auto winner = votes.begin();
    for (auto it = votes.begin(); it != votes.end(); ++it) {
      if (it->second > winner->second) winner = it;
    }
    gt.segments.push_back({seg.start, seg.end, winner->first, seg.text});
    const std::size_t n_words = seg.word_end - seg.word_begin;
    if (votes.size() > 1) gt.review.push_back({seg.id, "mixed speakers"});
    if (n_words > 0 && static_cast<double>(unaligned) > 0.3 * static_cast<double>(n_words)) {
      gt.review.push_back({seg.id, "over 30% unaligned words"});
    }
  }
  return gt;
}

std::string format_review(std::span<const ReviewItem> review) {
  std::string out;
  for (const auto& r : review) out += "segment " + std::to_string(r.segment_id) + "\t" + r.reason + "\n";
  return out;
}

}  // namespace castline
