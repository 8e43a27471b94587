// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#include "castline/pipeline.hpp"

#include "castline/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <fstream>
#include <set>
#include <sstream>

namespace castline {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing input file: " + path.string());
  return in;
}

template <typename Fn>
auto parse_file(const fs::path& path, Fn&& fn) {
  auto in = open_input(path);
  try {
    return fn(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace

AliasTable SeriesConfig::aliases() const {
  AliasTable table;
  for (const auto& c : cast) {
    table[upper(c.character_id)] = c.character_id;
    table[upper(c.display_name)] = c.character_id;
    const auto space = c.display_name.find(' ');
    if (space != std::string::npos) table[upper(c.display_name.substr(0, space))] = c.character_id;
  }
  // Explicit aliases win over derived names.
  for (const auto& c : cast) {
    for (const auto& a : c.aliases) table[upper(a)] = c.character_id;
  }
  return table;
}

std::map<std::string, std::string> SeriesConfig::display_names() const {
  std::map<std::string, std::string> names;
  for (const auto& c : cast) names[c.character_id] = c.display_name;
  return names;
}

SeriesConfig load_series_config(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": malformed series config: " + e.what());
  }
  SeriesConfig s;
  const fs::path base = path.parent_path();
  try {
    s.series_id = doc.value("series_id", std::string{});
    if (!doc.contains("cast") || !doc["cast"].is_array()) throw DataError("series config needs a 'cast' array");
    if (!doc.contains("episodes") || !doc["episodes"].is_array()) {
      throw DataError("series config needs an 'episodes' array");
    }
    for (const auto& c : doc["cast"]) {
      CastEntry e;
      e.character_id = c.at("id").get<std::string>();
      e.display_name = c.value("name", e.character_id);
      e.aliases = c.value("aliases", std::vector<std::string>{});
      e.prototype = l2_normalize(c.at("prototype").get<Vec>());
      for (const auto& ep : c.value("episodes", std::vector<std::string>{})) e.episodes.insert(ep);
      if (e.character_id.empty() || e.character_id == kUnknown) {
        throw DataError("invalid character id '" + e.character_id + "'");
      }
      const bool duplicate = std::any_of(s.cast.begin(), s.cast.end(),
                                         [&](const CastEntry& o) { return o.character_id == e.character_id; });
      if (duplicate) throw DataError("duplicate character id '" + e.character_id + "'");
      s.cast.push_back(std::move(e));
    }
    for (const auto& m : doc["episodes"]) {
      fs::path p(m.get<std::string>());
      s.manifests.push_back(p.is_absolute() ? p : base / p);
    }
    s.pipeline = pipeline_config_from_json(doc.contains("pipeline") ? doc["pipeline"] : json());
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return s;
}

std::vector<Episode> load_episodes(const SeriesConfig& series, bool require_voice, bool load_visual, int jobs) {
  std::vector<Episode> episodes(series.manifests.size());
  parallel_for(series.manifests.size(), jobs, [&](std::size_t i) {
    episodes[i] = load_episode(load_manifest(series.manifests[i]), series.pipeline, require_voice, load_visual);
  });
  return episodes;
}

std::string run_exemplars(const SeriesConfig& series, const ExemplarsCommand& cmd) {
  const auto episodes = load_episodes(series, /*require_voice=*/true, /*load_visual=*/true, cmd.jobs);
  StageLog log;
  const auto result = build_exemplars(episodes, series.cast, series.pipeline, &log, cmd.jobs);
  const std::string table = format_yield_table(yield_from_log(log));
  write_file_atomic(cmd.exemplars_out, serialize_exemplars(result.exemplars));
  if (cmd.yield_out) write_file_atomic(*cmd.yield_out, table);
  return table;
}

namespace {

CharacterBank bank_from_file(const fs::path& exemplars) {
  const auto records = parse_file(exemplars, [](std::istream& in) { return parse_exemplars(in); });
  return build_centroids(records);
}

fs::path assignment_path(const fs::path& dir, const std::string& episode) {
  return dir / (episode + ".assign.ndjson");
}

}  // namespace

void run_assign(const SeriesConfig& series, const AssignCommand& cmd) {
  const CharacterBank bank = bank_from_file(cmd.exemplars);
  const auto episodes = load_episodes(series, /*require_voice=*/true, /*load_visual=*/false, cmd.jobs);
  std::vector<std::string> outputs(episodes.size());
  parallel_for(episodes.size(), cmd.jobs, [&](std::size_t i) {
    const auto assignments = assign_episode(episodes[i], bank, series.pipeline);
    long unknown = std::count_if(assignments.begin(), assignments.end(),
                                 [](const Assignment& a) { return a.label == kUnknown; });
    log(LogLevel::kInfo, "assign", episodes[i].id(),
        "segments=" + std::to_string(assignments.size()) + " unknown=" + std::to_string(unknown));
    outputs[i] = serialize_assignments(episodes[i].segments, assignments);
  });
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    write_file_atomic(assignment_path(cmd.out_dir, episodes[i].id()), outputs[i]);
  }
}

namespace {

std::vector<LabelledSegment> load_hypothesis(const fs::path& dir, const std::string& episode) {
  const auto rows = parse_file(assignment_path(dir, episode), [](std::istream& in) { return parse_assignments(in); });
  std::vector<LabelledSegment> out;
  out.reserve(rows.size());
  for (const auto& [seg, a] : rows) out.push_back(seg);
  return out;
}

}  // namespace

void run_emit(const SeriesConfig& series, const EmitCommand& cmd) {
  const auto names = series.display_names();
  EmitOptions opts;
  opts.voice_spans = series.pipeline.vtt_voice_spans;
  for (const auto& mpath : series.manifests) {
    const auto manifest = load_manifest(mpath);
    const auto hyp = load_hypothesis(cmd.assignments_dir, manifest.episode_id);
    const auto cues = cues_from_segments(hyp, names);
    const char* ext = cmd.format == SubtitleFormat::kSrt ? ".srt" : ".vtt";
    write_file_atomic(cmd.out_dir / (manifest.episode_id + ext), emit_subtitles(cues, cmd.format, opts));
  }
}

namespace {

struct EpisodeTotals {
  DerBreakdown der;
  DerBreakdown der_overlap;
  AccuracyCounts accuracy;
  CharacterCountTable characters;
  EditCounts edits;
};

MetricsReport to_report(const std::string& name, const EpisodeTotals& t) {
  MetricsReport r;
  r.name = name;
  r.der = 100.0 * t.der.rate();
  r.der_with_overlap = t.der_overlap.scored_reference > 0 ? 100.0 * t.der_overlap.rate()
                                                          : std::numeric_limits<double>::quiet_NaN();
  r.accuracy = t.accuracy.overlapping > 0
                   ? 100.0 * static_cast<double>(t.accuracy.correct) / static_cast<double>(t.accuracy.overlapping)
                   : 0.0;
  const auto pr = finalize_per_character(t.characters);
  r.ppc = pr.ppc;
  r.rpc = pr.rpc;
  r.per_character = pr.table;
  r.wer = t.edits.reference_words > 0
              ? 100.0 * static_cast<double>(t.edits.errors()) / static_cast<double>(t.edits.reference_words)
              : 0.0;
  return r;
}

ordered_json report_json(const MetricsReport& r) {
  ordered_json j;
  j["name"] = r.name;
  j["der"] = r.der;
  j["der_with_overlap"] = std::isnan(r.der_with_overlap) ? ordered_json(nullptr) : ordered_json(r.der_with_overlap);
  j["accuracy"] = r.accuracy;
  j["ppc"] = r.ppc;
  j["rpc"] = r.rpc;
  j["wer"] = r.wer;
  j["per_character"] = ordered_json::array();
  for (const auto& c : r.per_character) {
    ordered_json row;
    row["character"] = c.character;
    row["precision"] = c.precision ? ordered_json(*c.precision) : ordered_json(nullptr);
    row["recall"] = c.recall;
    row["support"] = c.support;
    j["per_character"].push_back(row);
  }
  return j;
}

std::string joined_text(const std::vector<WordToken>& words) {
  std::string out;
  for (const auto& w : words) out += (out.empty() ? "" : " ") + w.text;
  return out;
}

}  // namespace

std::vector<MetricsReport> run_eval(const SeriesConfig& series, const EvalCommand& cmd) {
  const PipelineConfig& cfg = series.pipeline;
  std::vector<MetricsReport> rows;
  EpisodeTotals overall;
  for (const auto& mpath : series.manifests) {
    const auto manifest = load_manifest(mpath);
    fs::path gt_path;
    if (cmd.gt_dir) gt_path = *cmd.gt_dir / (manifest.episode_id + ".gt.ndjson");
    else if (manifest.truth) gt_path = *manifest.truth;
    else throw DataError("episode " + manifest.episode_id + " has no ground truth; pass --gt-dir");
    auto ref = parse_file(gt_path, [](std::istream& in) { return parse_gt(in); });
    auto hyp = load_hypothesis(cmd.assignments_dir, manifest.episode_id);
    const auto words = parse_file(manifest.words, [](std::istream& in) { return parse_words(in); });
    if (cmd.long_only) {
      const double cut = cfg.long_segment_cutoff;
      std::erase_if(ref, [&](const GTSegment& g) { return !(g.end - g.start > cut); });
      std::erase_if(hyp, [&](const LabelledSegment& h) { return !(h.end - h.start > cut); });
    }

    EpisodeTotals t;
    DerOptions opts{cfg.der_collar, false, cfg.unknown_as_miss};
    t.der = der_breakdown(ref, hyp, opts);
    if (cmd.include_overlap) {
      opts.include_overlap = true;
      t.der_overlap = der_breakdown(ref, hyp, opts);
    }
    t.accuracy = accuracy_counts(hyp, ref);
    t.characters = character_counts(hyp, ref);
    std::string ref_text;
    for (const auto& g : ref) ref_text += (ref_text.empty() ? "" : " ") + g.text;
    const auto ref_words = normalize_text(ref_text);
    if (!ref_words.empty()) t.edits = word_edit_counts(ref_words, normalize_text(joined_text(words)));

    rows.push_back(to_report(manifest.episode_id, t));
    overall.der += t.der;
    overall.der_overlap += t.der_overlap;
    overall.accuracy.correct += t.accuracy.correct;
    overall.accuracy.overlapping += t.accuracy.overlapping;
    merge_counts(overall.characters, t.characters);
    overall.edits += t.edits;
  }
  rows.push_back(to_report("overall", overall));

  if (cmd.json_out) {
    ordered_json doc;
    doc["long_only"] = cmd.long_only;
    doc["collar"] = cfg.der_collar;
    doc["reports"] = ordered_json::array();
    for (const auto& r : rows) doc["reports"].push_back(report_json(r));
    write_file_atomic(*cmd.json_out, doc.dump(2) + "\n");
  }
  return rows;
}

std::vector<SweepEpisode> sweep_data(const SeriesConfig& series, const fs::path& exemplars, int jobs) {
  const CharacterBank bank = bank_from_file(exemplars);
  const auto episodes = load_episodes(series, /*require_voice=*/true, /*load_visual=*/false, jobs);
  std::vector<SweepEpisode> data(episodes.size());
  parallel_for(episodes.size(), jobs, [&](std::size_t i) {
    const Episode& ep = episodes[i];
    if (!ep.manifest.truth) throw DataError("episode " + ep.id() + " has no ground truth for the sweep");
    data[i].truth = parse_file(*ep.manifest.truth, [](std::istream& in) { return parse_gt(in); });
    // With d = 2 every segment keeps its nearest centroid.
    const auto segments = assignable_segments(ep, series.pipeline);
    PipelineConfig open = series.pipeline;
    open.unknown_distance_d = 2.0;
    const auto assignments = assign_episode(ep, bank, open);
    for (std::size_t k = 0; k < segments.size(); ++k) {
      const auto& a = assignments[k];
      data[i].segments.push_back({segments[k].start, segments[k].end, a.label == kUnknown ? "" : a.label,
                                  a.distance});
    }
  });
  return data;
}

SweepResult run_sweep(const SeriesConfig& series, const SweepCommand& cmd) {
  const CharacterBank bank = bank_from_file(cmd.exemplars);
  const auto data = sweep_data(series, cmd.exemplars, cmd.jobs);
  SweepResult result;
  const auto grid = series.pipeline.sweep_grid();
  result.curve = sweep_thresholds(data, grid, series.pipeline.long_segment_cutoff);
  if (cmd.long_only) {
    std::erase_if(result.curve, [](const CurvePoint& p) { return p.segment_class != "long"; });
  }
  std::set<std::string> covered;
  for (const auto& [id, c] : bank.centroids) covered.insert(id);
  result.oracle = oracle_point(data, covered);
  write_file_atomic(cmd.out, format_curve(result.curve));
  return result;
}

GroundTruth align_files(const fs::path& transcript, const fs::path& words, const AliasTable& aliases,
                        const PipelineConfig& config) {
  const auto lines = parse_file(transcript, [&](std::istream& in) { return parse_transcript(in, aliases); });
  const auto timed = parse_file(words, [](std::istream& in) { return parse_words(in); });
  const auto segments = sentence_segments(timed, SegmentationOptions::from(config));
  const auto tw = transcript_words(lines);
  const auto alignment = dtw_align(tw, timed);
  log(LogLevel::kInfo, "align", "", "cost=" + std::to_string(alignment.cost));
  return words_to_gt_segments(alignment.timed_speakers, alignment.path, segments);
}

void run_align(const SeriesConfig& series, const AlignCommand& cmd) {
  const auto aliases = series.aliases();
  bool any = false;
  for (const auto& mpath : series.manifests) {
    const auto manifest = load_manifest(mpath);
    if (!manifest.transcript) continue;
    any = true;
    const auto gt = align_files(*manifest.transcript, manifest.words, aliases, series.pipeline);
    write_file_atomic(cmd.out_dir / (manifest.episode_id + ".gt.ndjson"), serialize_gt(gt.segments));
    write_file_atomic(cmd.out_dir / (manifest.episode_id + ".review.txt"), format_review(gt.review));
  }
  if (!any) throw DataError("no episode manifest names a transcript");
}

RunReport run_pipeline(const SeriesConfig& series, const RunCommand& cmd) {
  RunReport report;
  const fs::path exemplars = cmd.out_dir / "exemplars.ndjson";
  const fs::path assignments = cmd.out_dir / "assignments";
  report.yield_table = run_exemplars(series, {exemplars, cmd.out_dir / "yield.txt", cmd.jobs});
  run_assign(series, {exemplars, assignments, cmd.jobs});
  run_emit(series, {assignments, cmd.out_dir / "subtitles", cmd.format});

  bool evaluate = true;
  if (cmd.evaluate) {
    evaluate = *cmd.evaluate;
  } else {
    for (const auto& m : series.manifests) evaluate = evaluate && load_manifest(m).truth.has_value();
  }
  if (evaluate) {
    report.metrics = run_eval(series, {assignments, std::nullopt, cmd.out_dir / "metrics.json", false, true});
    write_file_atomic(cmd.out_dir / "metrics.txt", format_metrics_table(report.metrics));
  }
  return report;
}

}  // namespace castline
