// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

// castline: batch speaker naming for TV episodes, one subcommand per stage.

#include "castline/pipeline.hpp"
#include "castline/synth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

namespace {

using namespace castline;

struct Overrides {
  std::optional<double> unknown_distance;
  std::optional<double> collar;
};

struct Common {
  std::string config;
  int jobs = 1;
  Overrides overrides;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--config", common.config, "Series config (series.json)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--jobs", common.jobs, "Episodes processed in parallel")->check(CLI::PositiveNumber);
}

SeriesConfig load_with_overrides(const Common& common) {
  SeriesConfig series = load_series_config(common.config);
  if (common.overrides.unknown_distance) series.pipeline.unknown_distance_d = *common.overrides.unknown_distance;
  if (common.overrides.collar) series.pipeline.der_collar = *common.overrides.collar;
  validate(series.pipeline);
  return series;
}

void print_metrics(const std::vector<MetricsReport>& rows) {
  std::cout << format_metrics_table(rows);
  if (!rows.empty()) std::cout << "\n" << format_character_table(rows.back());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"castline: name the speakers of TV episodes and write subtitles"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "castline 0.1.0");

  Common common;
  std::string format = "srt";
  bool long_only = false;
  bool overlap = true;

  auto* exemplars = app.add_subcommand("exemplars", "Build voice exemplars from on-screen speech");
  add_common(exemplars, common);
  std::string exemplars_out;
  std::string yield_out;
  exemplars->add_option("--out", exemplars_out, "Exemplars file to write")->required();
  exemplars->add_option("--yield", yield_out, "Also write the yield table here");

  auto* assign = app.add_subcommand("assign", "Name every speech segment by nearest centroid");
  add_common(assign, common);
  std::string assign_exemplars;
  std::string assign_out;
  assign->add_option("--exemplars", assign_exemplars, "Exemplars file")->required()->check(CLI::ExistingFile);
  assign->add_option("--out", assign_out, "Directory for <episode>.assign.ndjson")->required();
  assign->add_option("--unknown-distance", common.overrides.unknown_distance, "Cosine distance beyond which a segment is UNKNOWN");

  auto* align = app.add_subcommand("align", "Build ground truth by aligning transcripts to timed words");
  add_common(align, common);
  std::string align_out;
  align->add_option("--out", align_out, "Directory for <episode>.gt.ndjson and review lists")->required();

  auto* eval = app.add_subcommand("eval", "Score assignments against ground truth");
  add_common(eval, common);
  std::string eval_assignments;
  std::string eval_gt;
  std::string eval_json;
  eval->add_option("--assignments", eval_assignments, "Directory of <episode>.assign.ndjson")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--gt-dir", eval_gt, "Directory of <episode>.gt.ndjson ground truth (default: manifest truth)");
  eval->add_option("--json", eval_json, "Also write the report as JSON");
  eval->add_option("--collar", common.overrides.collar, "DER collar in seconds");
  eval->add_flag("--overlap,!--no-overlap", overlap, "Also score DER over overlapping speech (default on)");
  eval->add_flag("--long-only", long_only, "Score only segments longer than the long cut-off");

  auto* sweep = app.add_subcommand("sweep", "Precision against POCS over unknown-distance thresholds");
  add_common(sweep, common);
  std::string sweep_exemplars;
  std::string sweep_out;
  sweep->add_option("--exemplars", sweep_exemplars, "Exemplars file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", sweep_out, "Curve file to write (TSV)")->required();
  sweep->add_flag("--long-only", long_only, "Keep only the long-segment curve");

  auto* emit = app.add_subcommand("emit", "Write SRT or WebVTT subtitles from assignments");
  add_common(emit, common);
  std::string emit_assignments;
  std::string emit_out;
  emit->add_option("--assignments", emit_assignments, "Directory of <episode>.assign.ndjson")->required()->check(CLI::ExistingDirectory);
  emit->add_option("--out", emit_out, "Directory for subtitle files")->required();
  emit->add_option("--format", format, "srt or vtt")->check(CLI::IsMember({"srt", "vtt"}));

  auto* synth = app.add_subcommand("synth", "Generate a synthetic series with planted ground truth");
  std::string synth_out;
  std::string preset = "easy";
  SynthConfig sc;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--preset", preset, "easy or noisy")->check(CLI::IsMember({"easy", "noisy"}));
  auto* seed_opt = synth->add_option("--seed", sc.seed, "Random seed");
  auto* chars_opt = synth->add_option("--characters", sc.n_characters, "Number of characters");
  auto* eps_opt = synth->add_option("--episodes", sc.n_episodes, "Number of episodes");
  auto* segs_opt = synth->add_option("--segments", sc.segments_per_episode, "Segments per episode");

  auto* run = app.add_subcommand("run", "exemplars, assign, emit and (with ground truth) eval");
  add_common(run, common);
  std::string run_out;
  std::optional<bool> evaluate;
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_option("--format", format, "srt or vtt")->check(CLI::IsMember({"srt", "vtt"}));
  run->add_option("--unknown-distance", common.overrides.unknown_distance, "Cosine distance beyond which a segment is UNKNOWN");
  run->add_option("--collar", common.overrides.collar, "DER collar in seconds");
  run->add_flag("--eval,!--no-eval", evaluate, "Force evaluation on or off (default: when ground truth exists)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) {
      SynthConfig config = preset == "noisy" ? SynthConfig::noisy(sc.seed) : SynthConfig::easy(sc.seed);
      if (*seed_opt) config.seed = sc.seed;
      if (*chars_opt) config.n_characters = sc.n_characters;
      if (*eps_opt) config.n_episodes = sc.n_episodes;
      if (*segs_opt) config.segments_per_episode = sc.segments_per_episode;
      std::cout << generate(config, synth_out).string() << "\n";
      return 0;
    }

    const SeriesConfig series = load_with_overrides(common);
    if (exemplars->parsed()) {
      ExemplarsCommand c{exemplars_out, std::nullopt, common.jobs};
      if (!yield_out.empty()) c.yield_out = yield_out;
      std::cout << run_exemplars(series, c);
    } else if (assign->parsed()) {
      run_assign(series, {assign_exemplars, assign_out, common.jobs});
    } else if (align->parsed()) {
      run_align(series, {align_out});
    } else if (eval->parsed()) {
      EvalCommand c{eval_assignments, std::nullopt, std::nullopt, long_only, overlap};
      if (!eval_gt.empty()) c.gt_dir = eval_gt;
      if (!eval_json.empty()) c.json_out = eval_json;
      print_metrics(run_eval(series, c));
    } else if (sweep->parsed()) {
      const auto result = run_sweep(series, {sweep_exemplars, sweep_out, long_only, common.jobs});
      std::printf("oracle pocs=%.4f precision=%.4f\n", result.oracle.pocs, result.oracle.precision);
    } else if (emit->parsed()) {
      run_emit(series, {emit_assignments, emit_out, parse_format(format)});
    } else if (run->parsed()) {
      const auto report = run_pipeline(series, {run_out, parse_format(format), evaluate, common.jobs});
      std::cout << report.yield_table;
      if (!report.metrics.empty()) {
        std::cout << "\n";
        print_metrics(report.metrics);
      }
    }
  } catch (const DataError& e) {
    std::cerr << "castline: error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "castline: invalid setting: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "castline: error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
