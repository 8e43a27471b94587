// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "castline/aligner.hpp"
#include "castline/assigner.hpp"
#include "castline/config.hpp"
#include "castline/exemplar.hpp"
#include "castline/ingest.hpp"
#include "castline/log.hpp"
#include "castline/metrics.hpp"
#include "castline/subtitle.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace castline {

namespace fs = std::filesystem;

/// One document per series: cast (with aliases and visual prototypes),
/// episode manifest paths and pipeline overrides.
struct SeriesConfig {
  std::string series_id;
  std::vector<CastEntry> cast;
  std::vector<fs::path> manifests;
  PipelineConfig pipeline;

  /// Transcript name -> character id, from ids, display names, first names and aliases.
  AliasTable aliases() const;
  std::map<std::string, std::string> display_names() const;
};

SeriesConfig load_series_config(const fs::path& path);

/// Episodes in manifest order. Any episode failing to load aborts the call.
std::vector<Episode> load_episodes(const SeriesConfig& series, bool require_voice, bool load_visual, int jobs);

// Each command below reads and writes only the documented file formats and
// is what the CLI subcommand of the same name runs.

struct ExemplarsCommand {
  fs::path exemplars_out;
  std::optional<fs::path> yield_out;
  int jobs = 1;
};

/// Returns the yield table text.
std::string run_exemplars(const SeriesConfig& series, const ExemplarsCommand& cmd);

struct AssignCommand {
  fs::path exemplars;
  fs::path out_dir;  // <episode>.assign.ndjson per episode
  int jobs = 1;
};

void run_assign(const SeriesConfig& series, const AssignCommand& cmd);

struct EmitCommand {
  fs::path assignments_dir;
  fs::path out_dir;  // <episode>.srt or .vtt
  SubtitleFormat format = SubtitleFormat::kSrt;
};

void run_emit(const SeriesConfig& series, const EmitCommand& cmd);

struct EvalCommand {
  fs::path assignments_dir;
  std::optional<fs::path> gt_dir;  // <episode>.gt.ndjson; default: manifest truth
  std::optional<fs::path> json_out;
  bool long_only = false;
  bool include_overlap = true;  // also score DER(O)
};

/// Per-episode rows plus an "overall" row (duration-weighted DER and WER,
/// segment-weighted accuracy, pooled per-character counts).
std::vector<MetricsReport> run_eval(const SeriesConfig& series, const EvalCommand& cmd);

struct SweepCommand {
  fs::path exemplars;
  fs::path out;
  bool long_only = false;
  int jobs = 1;
};

struct SweepResult {
  std::vector<CurvePoint> curve;
  OraclePoint oracle;
};

/// Nearest-centroid label and distance for every assignable segment, with
/// each episode's truth. Every manifest must name a truth file.
std::vector<SweepEpisode> sweep_data(const SeriesConfig& series, const fs::path& exemplars, int jobs);

SweepResult run_sweep(const SeriesConfig& series, const SweepCommand& cmd);

struct AlignCommand {
  fs::path out_dir;  // <episode>.gt.ndjson and <episode>.review.txt
};

/// Aligns every episode whose manifest names a transcript.
void run_align(const SeriesConfig& series, const AlignCommand& cmd);

/// Aligns one transcript file against one words file.
GroundTruth align_files(const fs::path& transcript, const fs::path& words, const AliasTable& aliases,
                        const PipelineConfig& config);

struct RunCommand {
  fs::path out_dir;
  SubtitleFormat format = SubtitleFormat::kSrt;
  std::optional<bool> evaluate;  // unset: evaluate when every episode has truth
  int jobs = 1;
};

struct RunReport {
  std::string yield_table;
  std::vector<MetricsReport> metrics;  // empty when not evaluated
};

/// exemplars -> assign -> emit -> eval, writing exemplars.ndjson, yield.txt,
/// assignments/, subtitles/ and metrics.txt/metrics.json under out_dir.
RunReport run_pipeline(const SeriesConfig& series, const RunCommand& cmd);

}  // namespace castline
