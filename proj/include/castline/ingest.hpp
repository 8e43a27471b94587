// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "castline/config.hpp"
#include "castline/core.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace castline {

// Feature files are newline-delimited JSON records. Parsers report the
// offending 1-based line number in the DataError message; blank lines are
// skipped. Serializers write the canonical form the parsers read back
// byte-for-byte.

std::vector<WordToken> parse_words(std::istream& in);
std::string serialize_words(std::span<const WordToken> words);

std::vector<LaughterInterval> parse_laughter(std::istream& in);
std::string serialize_laughter(std::span<const LaughterInterval> intervals);

/// Every frame must share one H x W shape; values must lie in [0,1].
std::vector<HeatmapFrame> parse_heatmaps(std::istream& in);
std::string serialize_heatmaps(std::span<const HeatmapFrame> frames);

/// `dim` of 0 accepts whatever the first record carries.
std::vector<FaceFrame> parse_face_embeddings(std::istream& in, int dim);
std::string serialize_face_embeddings(std::span<const FaceFrame> frames);

using VoiceTable = std::map<int, Vec>;
VoiceTable parse_voice_embeddings(std::istream& in, int dim);
std::string serialize_voice_embeddings(const VoiceTable& table);

/// Ground-truth speaker segments: {"s", "e", "speaker", "text"}.
std::vector<GTSegment> parse_gt(std::istream& in);
std::string serialize_gt(std::span<const GTSegment> segments);

struct SegmentationOptions {
  std::vector<std::string> abbreviations = {"mr.", "mrs.", "dr.", "ms.", "st.", "jr.", "sr."};
  double max_word_gap = 3.0;

  static SegmentationOptions from(const PipelineConfig& config);
};

/// Splits a start-sorted word stream into sentences. A sentence closes after
/// a word ending in . ? ! or an ellipsis (closing quotes/brackets are looked
/// through) unless the word is a listed abbreviation, and also whenever the
/// silence before the next word exceeds max_word_gap. Ids are 0-based.
std::vector<SpeechSegment> sentence_segments(std::span<const WordToken> words,
                                             const SegmentationOptions& options = {});

struct EpisodeManifest {
  std::string episode_id;
  std::string series_id;
  std::filesystem::path words;
  std::filesystem::path laughter;
  std::filesystem::path heatmaps;
  std::filesystem::path faces;
  std::optional<std::filesystem::path> voice;
  std::optional<std::filesystem::path> truth;
  std::optional<std::filesystem::path> transcript;
  int voice_dim = 0;
  int visual_dim = 0;
  double heatmap_fps = 0.0;
  nlohmann::json models;  // feature provenance declared by the exporter
};

/// Relative paths are resolved against the manifest's directory.
EpisodeManifest load_manifest(const std::filesystem::path& path);
nlohmann::ordered_json manifest_to_json(const EpisodeManifest& manifest,
                                const std::filesystem::path& relative_to);

struct Episode {
  EpisodeManifest manifest;
  std::vector<WordToken> words;
  std::vector<SpeechSegment> segments;
  std::vector<LaughterInterval> laughter;
  std::vector<HeatmapFrame> heatmaps;
  std::vector<FaceFrame> faces;
  VoiceTable voice;

  const std::string& id() const { return manifest.episode_id; }
};

/// Loads and validates every feature file named by the manifest. Dimensions
/// must agree with the config when it pins them. A missing voice file is an
/// error only when `require_voice` is set. Heatmaps and face frames are
/// skipped when `load_visual` is unset.
Episode load_episode(const EpisodeManifest& manifest, const PipelineConfig& config,
                     bool require_voice, bool load_visual = true);

std::string read_file(const std::filesystem::path& path);

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace castline
