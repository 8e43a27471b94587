// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#include "castline/assigner.hpp"

#include "castline/exemplar.hpp"
#include "castline/log.hpp"
#include "castline/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>

namespace castline {

using nlohmann::json;
using nlohmann::ordered_json;

CharacterBank build_centroids(std::span<const ExemplarRecord> exemplars, std::vector<std::string>* dropped) {
  std::map<std::string, Vec> sums;
  std::map<std::string, int> counts;
  for (const auto& r : exemplars) {
    const Vec unit = l2_normalize(r.embedding);
    auto [it, fresh] = sums.try_emplace(r.character_id, unit.size(), 0.0);
    if (it->second.size() != unit.size()) {
      throw DataError("exemplar embeddings for " + r.character_id + " differ in dimension");
    }
    for (std::size_t i = 0; i < unit.size(); ++i) it->second[i] += unit[i];
    ++counts[r.character_id];
  }
  CharacterBank bank;
  for (auto& [id, sum] : sums) {
    const double n = static_cast<double>(counts[id]);
    for (double& x : sum) x /= n;
    // Antipodal exemplars can cancel; such a character has no direction.
    if (!(l2_norm(sum) > 1e-12)) {
      log(LogLevel::kWarn, "centroids", "", "dropped=" + id + " reason=zero-mean");
      if (dropped != nullptr) dropped->push_back(id);
      continue;
    }
    bank.centroids.emplace(id, l2_normalize(sum));
    bank.counts.emplace(id, counts[id]);
  }
  return bank;
}

Assignment assign(std::span<const double> embedding, const CharacterBank& bank, double d, int segment_id) {
  Assignment a;
  a.segment_id = segment_id;
  a.label = kUnknown;
  a.distance = std::numeric_limits<double>::infinity();
  if (bank.empty()) return a;
  const Vec unit = l2_normalize(embedding);
  std::string nearest;
  // std::map iterates ids in ascending order, so strict < keeps the smallest id on ties.
  for (const auto& [id, centroid] : bank.centroids) {
    const double dist = 1.0 - std::clamp(dot(unit, centroid), -1.0, 1.0);
    if (dist < a.distance) {
      a.distance = dist;
      nearest = id;
    }
  }
  if (a.distance <= d) a.label = nearest;
  return a;
}

std::vector<SpeechSegment> assignable_segments(const Episode& episode, const PipelineConfig& config) {
  return filter_laughter(episode.segments, episode.laughter, config.laughter_threshold);
}

std::vector<Assignment> assign_episode(const Episode& episode, const CharacterBank& bank,
                                       const PipelineConfig& config) {
  const auto segments = assignable_segments(episode, config);
  std::string missing;
  for (const auto& s : segments) {
    if (episode.voice.count(s.id) == 0) missing += (missing.empty() ? "" : ",") + std::to_string(s.id);
  }
  if (!missing.empty()) {
    throw DataError("episode " + episode.id() + ": no voice embedding for segments " + missing);
  }
  std::vector<Assignment> out;
  out.reserve(segments.size());
  for (const auto& s : segments) {
    out.push_back(assign(episode.voice.at(s.id), bank, config.unknown_distance_d, s.id));
  }
  return out;
}

std::vector<LabelledSegment> label_segments(std::span<const SpeechSegment> segments,
                                            std::span<const Assignment> assignments) {
  std::map<int, const SpeechSegment*> by_id;
  for (const auto& s : segments) by_id[s.id] = &s;
  std::vector<LabelledSegment> out;
  out.reserve(assignments.size());
  for (const auto& a : assignments) {
    auto it = by_id.find(a.segment_id);
    if (it == by_id.end()) throw DataError("assignment for unknown segment " + std::to_string(a.segment_id));
    out.push_back({it->second->start, it->second->end, a.label, it->second->text});
  }
  return out;
}

namespace {

struct Tally {
  long total = 0;
  long classified = 0;
  long true_pos = 0;
};

void add_point(std::vector<CurvePoint>& out, double d, const Tally& t, const char* cls) {
  CurvePoint p;
  p.d = d;
  p.pocs = t.total > 0 ? static_cast<double>(t.classified) / static_cast<double>(t.total) : 0.0;
  p.precision = t.classified > 0 ? static_cast<double>(t.true_pos) / static_cast<double>(t.classified) : 1.0;
  p.segment_class = cls;
  out.push_back(p);
}

}  // namespace

std::vector<CurvePoint> sweep_thresholds(std::span<const SweepEpisode> episodes,
                                         std::span<const double> grid, double long_cutoff) {
  // Correctness of each segment's nearest label does not depend on d, only
  // whether it is classified does.
  struct Item {
    double distance;
    bool correct;
    bool is_long;
  };
  std::vector<Item> items;
  for (const auto& ep : episodes) {
    for (const auto& s : ep.segments) {
      const bool correct = !s.nearest.empty() &&
                           is_true_positive(LabelledSegment{s.start, s.end, s.nearest, {}}, ep.truth);
      items.push_back({s.nearest.empty() ? std::numeric_limits<double>::infinity() : s.distance, correct,
                       s.end - s.start > long_cutoff});
    }
  }
  std::vector<CurvePoint> all;
  std::vector<CurvePoint> longs;
  for (double d : grid) {
    Tally ta;
    Tally tl;
    for (const auto& it : items) {
      const bool classified = it.distance <= d;
      ++ta.total;
      ta.classified += classified;
      ta.true_pos += classified && it.correct;
      if (it.is_long) {
        ++tl.total;
        tl.classified += classified;
        tl.true_pos += classified && it.correct;
      }
    }
    add_point(all, d, ta, "all");
    add_point(longs, d, tl, "long");
  }
  all.insert(all.end(), longs.begin(), longs.end());
  return all;
}

OraclePoint oracle_point(std::span<const SweepEpisode> episodes, const std::set<std::string>& exemplar_characters) {
  long total = 0;
  long covered = 0;
  for (const auto& ep : episodes) {
    for (const auto& s : ep.segments) {
      ++total;
      const auto best = best_reference(s.start, s.end, ep.truth);
      if (best && exemplar_characters.count(ep.truth[*best].speaker) > 0) ++covered;
    }
  }
  OraclePoint p;
  p.pocs = total > 0 ? static_cast<double>(covered) / static_cast<double>(total) : 0.0;
  p.precision = 1.0;
  p.precision_defined = covered > 0;
  return p;
}

std::string serialize_assignments(std::span<const SpeechSegment> segments, std::span<const Assignment> assignments) {
  std::map<int, const SpeechSegment*> by_id;
  for (const auto& s : segments) by_id[s.id] = &s;
  std::string out;
  for (const auto& a : assignments) {
    auto it = by_id.find(a.segment_id);
    if (it == by_id.end()) throw DataError("assignment for unknown segment " + std::to_string(a.segment_id));
    ordered_json j;
    j["segment_id"] = a.segment_id;
    j["s"] = it->second->start;
    j["e"] = it->second->end;
    j["label"] = a.label;
    j["distance"] = std::isfinite(a.distance) ? json(a.distance) : json(nullptr);
    j["text"] = it->second->text;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<std::pair<LabelledSegment, Assignment>> parse_assignments(std::istream& in) {
  std::vector<std::pair<LabelledSegment, Assignment>> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      Assignment a;
      a.segment_id = j.at("segment_id").get<int>();
      a.label = j.at("label").get<std::string>();
      const json& dist = j.at("distance");
      a.distance = dist.is_null() ? std::numeric_limits<double>::infinity() : dist.get<double>();
      LabelledSegment seg{j.at("s").get<double>(), j.at("e").get<double>(), a.label, j.value("text", std::string{})};
      out.emplace_back(std::move(seg), std::move(a));
    } catch (const std::exception& e) {
      throw DataError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

std::string format_curve(std::span<const CurvePoint> curve) {
  std::string out = "d\tpocs\tprecision\tclass\n";
  char line[128];
  for (const auto& p : curve) {
    std::snprintf(line, sizeof line, "%.6f\t%.6f\t%.6f\t%s\n", p.d, p.pocs, p.precision, p.segment_class.c_str());
    out += line;
  }
  return out;
}

}  // namespace castline
