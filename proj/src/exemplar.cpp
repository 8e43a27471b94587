// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#include "castline/exemplar.hpp"

#include "castline/parallel.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <stdexcept>

namespace castline {

using nlohmann::json;
using nlohmann::ordered_json;

bool StageYield::monotone() const {
  return detected >= vad && vad >= av_gate && av_gate >= visual && visual >= audio_filter &&
         audio_filter >= 0;
}

double StageYield::percent_of_vad(long count) const {
  return vad > 0 ? 100.0 * static_cast<double>(count) / static_cast<double>(vad) : 0.0;
}

std::string format_yield_table(const StageYield& y) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-32s %15s %12s\n", "Step", "# of exemplars", "% of total");
  out += line;
  const std::pair<const char*, long> rows[] = {
      {"VAD detection", y.vad},
      {"Audio-visual speaker detection", y.av_gate},
      {"Visual character classification", y.visual},
      {"Audio filtering", y.audio_filter},
  };
  for (const auto& [name, count] : rows) {
    std::snprintf(line, sizeof line, "%-32s %15ld %12.1f\n", name, count, y.percent_of_vad(count));
    out += line;
  }
  return out;
}

std::vector<SpeechSegment> filter_laughter(std::span<const SpeechSegment> segments,
                                           std::span<const LaughterInterval> laughter,
                                           double threshold) {
  std::vector<SpeechSegment> kept;
  kept.reserve(segments.size());
  for (const auto& s : segments) {
    const bool laughing = std::any_of(laughter.begin(), laughter.end(), [&](const LaughterInterval& l) {
      return l.score >= threshold && overlap(s.start, s.end, l.start, l.end) > 0.0;
    });
    if (!laughing) kept.push_back(s);
  }
  return kept;
}

std::optional<Grid> average_heatmap(std::span<const HeatmapFrame> frames, const SpeechSegment& segment) {
  auto first = std::lower_bound(frames.begin(), frames.end(), segment.start,
                                [](const HeatmapFrame& f, double t) { return f.timestamp < t; });
  std::optional<Grid> sum;
  std::size_t n = 0;
  for (auto it = first; it != frames.end() && it->timestamp <= segment.end; ++it) {
    if (!sum) {
      sum = Grid(it->grid.rows(), it->grid.cols());
    } else if (it->grid.rows() != sum->rows() || it->grid.cols() != sum->cols()) {
      throw DataError("heatmap frames within a segment differ in shape");
    }
    for (int r = 0; r < sum->rows(); ++r) {
      for (int c = 0; c < sum->cols(); ++c) sum->at(r, c) += it->grid.at(r, c);
    }
    ++n;
  }
  if (!sum) return std::nullopt;
  for (int r = 0; r < sum->rows(); ++r) {
    for (int c = 0; c < sum->cols(); ++c) sum->at(r, c) /= static_cast<double>(n);
  }
  return sum;
}

namespace {

// Separable sliding-window maximum with the window clipped at the borders.
Grid max_filter(const Grid& g, int radius) {
  Grid horizontal(g.rows(), g.cols());
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) {
      double m = g.at(r, c);
      for (int cc = std::max(0, c - radius); cc <= std::min(g.cols() - 1, c + radius); ++cc) {
        m = std::max(m, g.at(r, cc));
      }
      horizontal.at(r, c) = m;
    }
  }
  Grid out(g.rows(), g.cols());
  for (int r = 0; r < g.rows(); ++r) {
    for (int c = 0; c < g.cols(); ++c) {
      double m = horizontal.at(r, c);
      for (int rr = std::max(0, r - radius); rr <= std::min(g.rows() - 1, r + radius); ++rr) {
        m = std::max(m, horizontal.at(rr, c));
      }
      out.at(r, c) = m;
    }
  }
  return out;
}

// True when an equal-valued cell ordered before (r, c) shares its window.
bool has_earlier_twin(const Grid& g, int r, int c, int radius) {
  const double v = g.at(r, c);
  for (int rr = std::max(0, r - radius); rr <= r; ++rr) {
    const int c_end = rr < r ? std::min(g.cols() - 1, c + radius) : c - 1;
    for (int cc = std::max(0, c - radius); cc <= c_end; ++cc) {
      if (g.at(rr, cc) == v) return true;
    }
  }
  return false;
}

}  // namespace

PeakSet detect_peaks(const Grid& heatmap, double tau_det, int peak_count, int nms_radius) {
  const int radius = std::max(0, nms_radius);
  const Grid window_max = max_filter(heatmap, radius);
  PeakSet candidates;
  for (int r = 0; r < heatmap.rows(); ++r) {
    for (int c = 0; c < heatmap.cols(); ++c) {
      const double v = heatmap.at(r, c);
      if (v == window_max.at(r, c) && !has_earlier_twin(heatmap, r, c, radius)) {
        candidates.push_back({r, c, v});
      }
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Peak& a, const Peak& b) { return a.value > b.value; });
  PeakSet accepted;
  for (const Peak& p : candidates) {
    if (static_cast<int>(accepted.size()) >= peak_count) break;
    const bool suppressed = std::any_of(accepted.begin(), accepted.end(), [&](const Peak& q) {
      return std::max(std::abs(p.row - q.row), std::abs(p.col - q.col)) <= radius;
    });
    if (!suppressed) accepted.push_back(p);
  }
  std::erase_if(accepted, [&](const Peak& p) { return !(p.value > tau_det); });
  return accepted;
}

std::optional<CharacterMatch> classify_character(std::span<const Vec> frames,
                                                 std::span<const CastEntry> cast, double tau_rec) {
  if (frames.empty() || cast.empty()) return std::nullopt;
  std::optional<CharacterMatch> best;
  bool tied = false;
  for (const auto& member : cast) {
    double sum = 0.0;
    for (const auto& f : frames) sum += cosine_similarity(f, member.prototype);
    const double score = sum / static_cast<double>(frames.size());
    if (!best || score > best->score) {
      best = CharacterMatch{member.character_id, score};
      tied = false;
    } else if (score == best->score) {
      tied = true;
    }
  }
  if (tied || !(best->score > tau_rec)) return std::nullopt;
  return best;
}

std::vector<CastEntry> cast_for_episode(std::span<const CastEntry> cast, const std::string& episode_id) {
  std::vector<CastEntry> out;
  for (const auto& c : cast) {
    if (c.episodes.empty() || c.episodes.count(episode_id) > 0) out.push_back(c);
  }
  return out;
}

std::vector<ExemplarRecord> knn_filter(std::span<const ExemplarRecord> records, int k) {
  std::map<std::string, std::size_t> class_size;
  for (const auto& r : records) ++class_size[r.character_id];

  std::vector<Vec> unit;
  unit.reserve(records.size());
  for (const auto& r : records) unit.push_back(l2_normalize(r.embedding));

  std::vector<ExemplarRecord> kept;
  std::vector<std::pair<double, std::size_t>> neighbours;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (class_size[records[i].character_id] < static_cast<std::size_t>(k)) {
      kept.push_back(records[i]);
      continue;
    }
    neighbours.clear();
    for (std::size_t j = 0; j < records.size(); ++j) {
      if (j != i) neighbours.emplace_back(1.0 - std::clamp(dot(unit[i], unit[j]), -1.0, 1.0), j);
    }
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k), neighbours.size());
    std::partial_sort(neighbours.begin(), neighbours.begin() + static_cast<std::ptrdiff_t>(take),
                      neighbours.end(), [&](const auto& a, const auto& b) {
                        if (a.first != b.first) return a.first < b.first;
                        const auto& ra = records[a.second];
                        const auto& rb = records[b.second];
                        if (ra.segment_id != rb.segment_id) return ra.segment_id < rb.segment_id;
                        if (ra.episode_id != rb.episode_id) return ra.episode_id < rb.episode_id;
                        return a.second < b.second;
                      });
    const bool agree = std::all_of(neighbours.begin(), neighbours.begin() + static_cast<std::ptrdiff_t>(take),
                                   [&](const auto& n) {
                                     return records[n.second].character_id == records[i].character_id;
                                   });
    if (agree) kept.push_back(records[i]);
  }
  return kept;
}

StageYield yield_from_log(const StageLog& log) {
  StageYield y;
  y.detected = log.total("detected");
  y.vad = log.total("vad");
  y.av_gate = log.total("av_gate");
  y.visual = log.total("visual");
  y.audio_filter = log.total("audio_filter");
  return y;
}

ExemplarResult build_exemplars(std::span<const Episode> episodes, std::span<const CastEntry> cast,
                               const PipelineConfig& config, StageLog* log, int jobs) {
  StageLog local;
  StageLog& sink = log != nullptr ? *log : local;
  std::vector<std::vector<ExemplarRecord>> per_episode(episodes.size());

  parallel_for(episodes.size(), jobs, [&](std::size_t e) {
    const Episode& ep = episodes[e];
    const auto kept = filter_laughter(ep.segments, ep.laughter, config.laughter_threshold);
    const auto present = cast_for_episode(cast, ep.id());

    long gated = 0;
    std::vector<int> missing_voice;
    std::vector<Vec> frames;
    for (const auto& seg : kept) {
      const auto heat = average_heatmap(ep.heatmaps, seg);
      if (!heat) continue;
      const int radius = config.nms_radius_for(heat->rows(), heat->cols());
      if (!single_speaker_gate(detect_peaks(*heat, config.tau_det, config.peak_count, radius))) continue;
      ++gated;

      frames.clear();
      auto it = std::lower_bound(ep.faces.begin(), ep.faces.end(), seg.start,
                                 [](const FaceFrame& f, double t) { return f.timestamp < t; });
      for (; it != ep.faces.end() && it->timestamp <= seg.end; ++it) frames.push_back(it->embedding);
      const auto match = classify_character(frames, present, config.tau_rec);
      if (!match) continue;

      auto voice = ep.voice.find(seg.id);
      if (voice == ep.voice.end()) {
        missing_voice.push_back(seg.id);
        continue;
      }
      per_episode[e].push_back({seg.id, ep.id(), match->character_id, voice->second});
    }
    if (!missing_voice.empty()) {
      std::string ids;
      for (int id : missing_voice) ids += (ids.empty() ? "" : ",") + std::to_string(id);
      throw DataError("episode " + ep.id() + ": no voice embedding for segments " + ids);
    }
    sink.record("detected", ep.id(), static_cast<long>(ep.segments.size()));
    sink.record("vad", ep.id(), static_cast<long>(kept.size()));
    sink.record("av_gate", ep.id(), gated);
    sink.record("visual", ep.id(), static_cast<long>(per_episode[e].size()));
  });

  ExemplarResult result;
  for (auto& recs : per_episode) {
    result.candidates.insert(result.candidates.end(), recs.begin(), recs.end());
  }
  result.exemplars = knn_filter(result.candidates, config.knn_k);

  std::map<std::string, long> survivors;
  for (const auto& r : result.exemplars) ++survivors[r.episode_id];
  for (const auto& ep : episodes) sink.record("audio_filter", ep.id(), survivors[ep.id()]);

  result.yield = yield_from_log(sink);
  if (!result.yield.monotone()) {
    throw std::logic_error("stage-1 yield is not monotone: " + format_yield_table(result.yield));
  }
  return result;
}

std::string serialize_exemplars(std::span<const ExemplarRecord> records) {
  std::string out;
  for (const auto& r : records) {
    ordered_json j;
    j["segment_id"] = r.segment_id;
    j["episode_id"] = r.episode_id;
    j["character_id"] = r.character_id;
    j["v"] = r.embedding;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<ExemplarRecord> parse_exemplars(std::istream& in) {
  std::vector<ExemplarRecord> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      ExemplarRecord r;
      r.segment_id = j.at("segment_id").get<int>();
      r.episode_id = j.at("episode_id").get<std::string>();
      r.character_id = j.at("character_id").get<std::string>();
      r.embedding = j.at("v").get<Vec>();
      if (r.embedding.empty() || !all_finite(r.embedding)) throw DataError("bad embedding");
      out.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw DataError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace castline
