// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#include "castline/config.hpp"

#include <algorithm>
#include <stdexcept>

namespace castline {

int PipelineConfig::nms_radius_for(int rows, int cols) const {
  if (nms_radius) return *nms_radius;
  return std::max(1, std::min(rows, cols) / 8);
}

std::vector<double> PipelineConfig::sweep_grid() const {
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(sweep_points));
  if (sweep_points == 1) return {sweep_max};
  for (int i = 0; i < sweep_points; ++i) {
    grid.push_back(sweep_max * static_cast<double>(i) / static_cast<double>(sweep_points - 1));
  }
  return grid;
}

namespace {

void require(bool ok, const char* field, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("config: ") + field + " " + what);
}

bool unit(double x) { return x >= 0.0 && x <= 1.0; }

}  // namespace

void validate(const PipelineConfig& c) {
  require(unit(c.laughter_threshold), "laughter_threshold", "must be in [0,1]");
  require(unit(c.tau_det), "tau_det", "must be in [0,1]");
  require(c.peak_count >= 1, "peak_count", "must be >= 1");
  require(!c.nms_radius || *c.nms_radius >= 0, "nms_radius", "must be >= 0");
  require(c.tau_rec >= -1.0 && c.tau_rec <= 1.0, "tau_rec", "must be in [-1,1]");
  require(c.knn_k >= 1, "knn_k", "must be >= 1");
  require(c.unknown_distance_d >= 0.0 && c.unknown_distance_d <= 2.0, "unknown_distance_d",
          "must be in [0,2]");
  require(c.der_collar >= 0.0, "der_collar", "must be >= 0");
  require(c.long_segment_cutoff >= 0.0, "long_segment_cutoff", "must be >= 0");
  require(c.voice_dim >= 0 && c.visual_dim >= 0, "embedding dims", "must be >= 0");
  require(c.max_word_gap > 0.0, "max_word_gap", "must be > 0");
  require(c.sweep_points >= 1, "sweep_points", "must be >= 1");
  require(c.sweep_max >= 0.0 && c.sweep_max <= 2.0, "sweep_max", "must be in [0,2]");
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& doc) {
  PipelineConfig c;
  if (doc.is_null()) return c;
  if (!doc.is_object()) throw std::invalid_argument("config: pipeline section must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key == "laughter_threshold") c.laughter_threshold = value.get<double>();
    else if (key == "tau_det") c.tau_det = value.get<double>();
    else if (key == "peak_count") c.peak_count = value.get<int>();
    else if (key == "nms_radius") {
      if (value.is_null()) c.nms_radius.reset();
      else c.nms_radius = value.get<int>();
    }
    else if (key == "tau_rec") c.tau_rec = value.get<double>();
    else if (key == "knn_k") c.knn_k = value.get<int>();
    else if (key == "unknown_distance_d") c.unknown_distance_d = value.get<double>();
    else if (key == "der_collar") c.der_collar = value.get<double>();
    else if (key == "long_segment_cutoff") c.long_segment_cutoff = value.get<double>();
    else if (key == "voice_dim") c.voice_dim = value.get<int>();
    else if (key == "visual_dim") c.visual_dim = value.get<int>();
    else if (key == "max_word_gap") c.max_word_gap = value.get<double>();
    else if (key == "abbreviations") c.abbreviations = value.get<std::vector<std::string>>();
    else if (key == "unknown_as_miss") c.unknown_as_miss = value.get<bool>();
    else if (key == "sweep_points") c.sweep_points = value.get<int>();
    else if (key == "sweep_max") c.sweep_max = value.get<double>();
    else if (key == "vtt_voice_spans") c.vtt_voice_spans = value.get<bool>();
    else throw std::invalid_argument("config: unknown pipeline key '" + key + "'");
  }
  validate(c);
  return c;
}

nlohmann::json to_json(const PipelineConfig& c) {
  nlohmann::json j;
  j["laughter_threshold"] = c.laughter_threshold;
  j["tau_det"] = c.tau_det;
  j["peak_count"] = c.peak_count;
  j["nms_radius"] = c.nms_radius ? nlohmann::json(*c.nms_radius) : nlohmann::json(nullptr);
  j["tau_rec"] = c.tau_rec;
  j["knn_k"] = c.knn_k;
  j["unknown_distance_d"] = c.unknown_distance_d;
  j["der_collar"] = c.der_collar;
  j["long_segment_cutoff"] = c.long_segment_cutoff;
  j["voice_dim"] = c.voice_dim;
  j["visual_dim"] = c.visual_dim;
  j["max_word_gap"] = c.max_word_gap;
  j["abbreviations"] = c.abbreviations;
  j["unknown_as_miss"] = c.unknown_as_miss;
  j["sweep_points"] = c.sweep_points;
  j["sweep_max"] = c.sweep_max;
  j["vtt_voice_spans"] = c.vtt_voice_spans;
  return j;
}

}  // namespace castline
