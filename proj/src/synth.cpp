// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#include "castline/synth.hpp"

#include "castline/core.hpp"
#include "castline/ingest.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>

namespace castline {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

SynthConfig SynthConfig::easy(std::uint64_t seed) {
  SynthConfig c;
  c.seed = seed;
  return c;
}

SynthConfig SynthConfig::noisy(std::uint64_t seed) {
  SynthConfig c;
  c.seed = seed;
  c.sigma_v = 0.12;
  c.sigma_f = 0.05;
  c.multi_speaker_fraction = 0.15;
  c.offscreen_fraction = 0.3;
  c.laughter_fraction = 0.1;
  c.exemplarless_fraction = 0.125;
  c.short_fraction = 0.4;
  c.short_noise_multiplier = 3.0;
  c.asr_noise = 0.05;
  return c;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("synth config: " + what);
}

bool unit(double x) { return x >= 0.0 && x <= 1.0; }

int suppression_radius(const SynthConfig& c) { return std::max(1, std::min(c.grid_rows, c.grid_cols) / 8); }

int exemplarless_count(const SynthConfig& c) {
  return static_cast<int>(std::lround(c.exemplarless_fraction * c.n_characters));
}

}  // namespace

void validate(const SynthConfig& c) {
  require(c.n_characters >= 1, "n_characters must be >= 1");
  require(c.n_episodes >= 1, "n_episodes must be >= 1");
  require(c.segments_per_episode >= 1, "segments_per_episode must be >= 1");
  require(c.voice_dim >= 2 && c.visual_dim >= 2, "embedding dimensions must be >= 2");
  require(c.sigma_v >= 0.0 && c.sigma_f >= 0.0, "noise scales must be >= 0");
  require(c.grid_rows >= 1 && c.grid_cols >= 1, "heatmap grid must be at least 1x1");
  require(c.heatmap_fps >= 5.0, "heatmap_fps must be >= 5 so every segment spans a frame");
  require(c.heatmap_noise >= 0.0 && c.heatmap_noise < 0.7, "heatmap_noise must be in [0, 0.7)");
  for (double f : {c.multi_speaker_fraction, c.offscreen_fraction, c.laughter_fraction,
                   c.exemplarless_fraction, c.short_fraction, c.asr_noise}) {
    require(unit(f), "fractions must lie in [0,1]");
  }
  require(c.multi_speaker_fraction + c.offscreen_fraction <= 1.0,
          "multi-speaker and off-screen fractions together exceed 1");
  require(c.short_noise_multiplier >= 0.0, "short_noise_multiplier must be >= 0");
  require(exemplarless_count(c) <= c.n_characters, "more exemplar-less characters than characters");
  if (c.multi_speaker_fraction > 0.0) {
    require(c.n_characters >= 2, "multi-speaker segments need at least two characters");
    require(std::max(c.grid_rows, c.grid_cols) >= 2 * suppression_radius(c) + 3,
            "heatmap grid too small to hold two separated peaks");
  }
}

namespace {

// mt19937_64 output is fully specified; the distributions are written out here
// so the corpus bytes do not depend on the standard library in use.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int below(int n) { return static_cast<int>(engine_() % static_cast<std::uint64_t>(n)); }
  int between(int lo, int hi) { return lo + below(hi - lo + 1); }

  double normal() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  Vec unit_vector(int dim) {
    Vec v(static_cast<std::size_t>(dim));
    do {
      for (double& x : v) x = normal();
    } while (!(l2_norm(v) > 1e-9));
    return l2_normalize(v);
  }

  Vec perturbed(const Vec& center, double sigma) {
    Vec v(center.size());
    do {
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = center[i] + sigma * normal();
    } while (!(l2_norm(v) > 1e-9));
    return l2_normalize(v);
  }

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

double round_to(double x, double step) { return std::round(x / step) * step; }

Vec rounded(Vec v, double step) {
  for (double& x : v) x = round_to(x, step);
  return v;
}

const char* const kWords[] = {
    "about", "after", "again", "always", "apartment", "before", "believe", "better", "coffee",
    "could", "dinner", "doctor", "doing", "either", "enough", "every", "family", "father",
    "friend", "going", "happen", "honest", "inside", "jacket", "kitchen", "little", "listen",
    "maybe", "minute", "money", "mother", "never", "nothing", "office", "people", "perfect",
    "really", "remember", "right", "seriously", "should", "something", "sorry", "still", "table",
    "thing", "think", "tomorrow", "tonight", "understand", "until", "waiting", "whatever",
    "window", "without", "wonderful", "yesterday", "listen", "outside", "believe", "weekend",
    "movie", "parking", "restaurant", "thursday", "cereal", "bagel", "button", "marble"};
constexpr int kWordCount = static_cast<int>(sizeof kWords / sizeof kWords[0]);

const char* const kNames[][2] = {
    {"Alice", "Archer"}, {"Bruno", "Baker"}, {"Carla", "Chen"},  {"Dmitri", "Dane"},
    {"Elena", "Evans"},  {"Farid", "Fox"},   {"Greta", "Gale"},  {"Hugo", "Hart"},
    {"Ines", "Iver"},    {"Jonas", "Jett"},  {"Kira", "Kent"},   {"Liam", "Lowe"},
    {"Maya", "Moss"},    {"Nils", "North"},  {"Olga", "Orr"},    {"Pavel", "Price"}};
constexpr int kNameCount = static_cast<int>(sizeof kNames / sizeof kNames[0]);

enum class Visual { kSingle, kMulti, kOffscreen };

const char* visual_name(Visual v) {
  switch (v) {
    case Visual::kSingle: return "single";
    case Visual::kMulti: return "multi";
    case Visual::kOffscreen: return "offscreen";
  }
  return "?";
}

struct Character {
  std::string id;
  std::string display_name;
  std::string alias;
  Vec voice_center;
  Vec prototype;
  bool exemplarless = false;
};

struct PlannedSegment {
  int speaker = 0;
  Visual visual = Visual::kSingle;
  bool is_short = false;
  bool laughter = false;
  std::vector<WordToken> words;      // timed stream (may carry ASR noise)
  std::vector<std::string> spoken;   // transcript words
  std::pair<int, int> peak{0, 0};
  std::pair<int, int> second_peak{0, 0};
  int bystander = -1;  // visible non-speaker for off-screen speech
  double start() const { return words.front().start; }
  double end() const { return words.back().end; }
};

std::string capitalize(std::string w) {
  if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  return w;
}

std::vector<Character> make_cast(const SynthConfig& c, Rng& rng) {
  std::vector<Character> cast;
  const int silent = exemplarless_count(c);
  for (int i = 0; i < c.n_characters; ++i) {
    Character ch;
    if (i < kNameCount) {
      ch.display_name = std::string(kNames[i][0]) + " " + kNames[i][1];
      ch.id = kNames[i][0];
      for (char& x : ch.id) x = static_cast<char>(std::tolower(static_cast<unsigned char>(x)));
      ch.alias = kNames[i][0];
      for (char& x : ch.alias) x = static_cast<char>(std::toupper(static_cast<unsigned char>(x)));
    } else {
      ch.display_name = "Character " + std::to_string(i + 1);
      ch.id = "char" + std::to_string(i + 1);
      ch.alias = "CHAR" + std::to_string(i + 1);
    }
    ch.voice_center = rng.unit_vector(c.voice_dim);
    ch.prototype = rounded(rng.unit_vector(c.visual_dim), 1e-6);
    // The last characters are the ones never seen on screen.
    ch.exemplarless = i >= c.n_characters - silent;
    cast.push_back(std::move(ch));
  }
  return cast;
}

std::pair<int, int> random_cell(const SynthConfig& c, Rng& rng) {
  return {rng.below(c.grid_rows), rng.below(c.grid_cols)};
}

std::vector<PlannedSegment> plan_episode(const SynthConfig& c, const std::vector<Character>& cast, Rng& rng) {
  std::vector<int> visible;
  for (int i = 0; i < c.n_characters; ++i) {
    if (!cast[static_cast<std::size_t>(i)].exemplarless) visible.push_back(i);
  }
  const int radius = suppression_radius(c);
  std::vector<PlannedSegment> plan;
  double t = round_to(rng.uniform(0.5, 1.5), 0.001);
  for (int s = 0; s < c.segments_per_episode; ++s) {
    PlannedSegment seg;
    seg.speaker = rng.below(c.n_characters);
    const Character& who = cast[static_cast<std::size_t>(seg.speaker)];
    const double u = rng.uniform();
    if (who.exemplarless) seg.visual = Visual::kOffscreen;
    else if (u < c.multi_speaker_fraction) seg.visual = Visual::kMulti;
    else if (u < c.multi_speaker_fraction + c.offscreen_fraction) seg.visual = Visual::kOffscreen;
    seg.is_short = rng.uniform() < c.short_fraction;
    seg.laughter = rng.uniform() < c.laughter_fraction;

    const int n_words = seg.is_short ? rng.between(1, 3) : rng.between(8, 14);
    const char* const enders[] = {".", "?", "!"};
    const std::string ender = enders[rng.below(3)];
    for (int w = 0; w < n_words; ++w) {
      std::string word = kWords[rng.below(kWordCount)];
      std::string heard = word;
      if (rng.uniform() < c.asr_noise) {
        do {
          heard = kWords[rng.below(kWordCount)];
        } while (heard == word);
      }
      std::string suffix;
      if (w + 1 == n_words) suffix = ender;
      else if (rng.uniform() < 0.1) suffix = ",";
      if (w == 0) {
        word = capitalize(word);
        heard = capitalize(heard);
      }
      seg.spoken.push_back(word + suffix);
      WordToken tok;
      tok.text = heard + suffix;
      tok.start = t;
      tok.end = round_to(t + rng.uniform(0.25, 0.45), 0.001);
      tok.confidence = round_to(rng.uniform(0.8, 1.0), 0.001);
      seg.words.push_back(tok);
      t = round_to(tok.end + rng.uniform(0.05, 0.15), 0.001);
    }
    t = round_to(seg.words.back().end + rng.uniform(0.4, 1.2), 0.001);

    seg.peak = random_cell(c, rng);
    if (seg.visual == Visual::kMulti) {
      do {
        seg.second_peak = random_cell(c, rng);
      } while (std::max(std::abs(seg.second_peak.first - seg.peak.first),
                        std::abs(seg.second_peak.second - seg.peak.second)) <= 2 * radius + 1);
    }
    if (seg.visual == Visual::kOffscreen) {
      std::vector<int> others;
      for (int v : visible) {
        if (v != seg.speaker) others.push_back(v);
      }
      if (!others.empty()) seg.bystander = others[static_cast<std::size_t>(rng.below(static_cast<int>(others.size())))];
    }
    plan.push_back(std::move(seg));
  }
  return plan;
}

void plant_blob(Grid& g, std::pair<int, int> cell, double peak) {
  constexpr double kSpread = 0.7;
  for (int r = std::max(0, cell.first - 2); r <= std::min(g.rows() - 1, cell.first + 2); ++r) {
    for (int col = std::max(0, cell.second - 2); col <= std::min(g.cols() - 1, cell.second + 2); ++col) {
      const double d2 = static_cast<double>((r - cell.first) * (r - cell.first) +
                                            (col - cell.second) * (col - cell.second));
      g.at(r, col) = std::max(g.at(r, col), peak * std::exp(-d2 / (2.0 * kSpread * kSpread)));
    }
  }
}

std::string line_json(const ordered_json& j) { return j.dump() + "\n"; }

}  // namespace

fs::path generate(const SynthConfig& c, const fs::path& out_dir) {
  validate(c);
  Rng rng(c.seed);
  const auto cast = make_cast(c, rng);
  fs::create_directories(out_dir);

  std::vector<std::string> episode_ids;
  std::vector<std::string> manifest_paths;
  for (int e = 0; e < c.n_episodes; ++e) {
    char id[16];
    std::snprintf(id, sizeof id, "ep%02d", e + 1);
    episode_ids.emplace_back(id);
  }

  for (int e = 0; e < c.n_episodes; ++e) {
    const std::string& ep_id = episode_ids[static_cast<std::size_t>(e)];
    const fs::path dir = out_dir / ep_id;
    const auto plan = plan_episode(c, cast, rng);

    std::vector<WordToken> words;
    std::string transcript;
    std::string truth;
    VoiceTable voice;
    std::vector<LaughterInterval> laughter;
    for (std::size_t s = 0; s < plan.size(); ++s) {
      const PlannedSegment& seg = plan[s];
      const Character& who = cast[static_cast<std::size_t>(seg.speaker)];
      words.insert(words.end(), seg.words.begin(), seg.words.end());
      std::string text;
      for (const auto& w : seg.spoken) text += (text.empty() ? "" : " ") + w;
      transcript += who.alias + ": " + text + "\n";

      ordered_json tj;
      tj["s"] = seg.start();
      tj["e"] = seg.end();
      tj["speaker"] = who.id;
      tj["text"] = text;
      tj["segment_id"] = static_cast<int>(s);
      tj["visual"] = visual_name(seg.visual);
      tj["laughter"] = seg.laughter;
      tj["short"] = seg.is_short;
      truth += line_json(tj);

      const double sigma = c.sigma_v * (seg.is_short ? c.short_noise_multiplier : 1.0);
      voice[static_cast<int>(s)] = rounded(rng.perturbed(who.voice_center, sigma), 1e-6);

      if (seg.laughter) {
        const double next = s + 1 < plan.size() ? plan[s + 1].start() : seg.end() + 1.0;
        laughter.push_back({round_to(std::max(seg.start(), seg.end() - 0.3), 0.001),
                            round_to(seg.end() + 0.45 * (next - seg.end()), 0.001),
                            round_to(rng.uniform(0.85, 0.99), 0.001)});
      } else if (c.laughter_fraction > 0.0 && rng.uniform() < 0.05) {
        // Sub-threshold detections must not remove anything.
        laughter.push_back({seg.start(), round_to(seg.start() + 0.2, 0.001), round_to(rng.uniform(0.2, 0.7), 0.001)});
      }
    }

    // Heatmaps and face frames share the frame clock.
    std::vector<HeatmapFrame> heatmaps;
    std::vector<FaceFrame> faces;
    const double end_time = plan.back().end() + 1.0;
    std::size_t cursor = 0;
    for (long k = 0;; ++k) {
      const double t = round_to(static_cast<double>(k) / c.heatmap_fps, 0.001);
      if (t > end_time) break;
      while (cursor < plan.size() && plan[cursor].end() < t) ++cursor;
      const PlannedSegment* seg = cursor < plan.size() && plan[cursor].start() <= t ? &plan[cursor] : nullptr;

      Grid g(c.grid_rows, c.grid_cols);
      for (int r = 0; r < g.rows(); ++r) {
        for (int col = 0; col < g.cols(); ++col) g.at(r, col) = c.heatmap_noise * rng.uniform();
      }
      Vec face;
      if (seg != nullptr && seg->visual != Visual::kOffscreen) {
        plant_blob(g, seg->peak, 0.92);
        if (seg->visual == Visual::kMulti) plant_blob(g, seg->second_peak, 0.9);
        face = rng.perturbed(cast[static_cast<std::size_t>(seg->speaker)].prototype, c.sigma_f);
      } else if (seg != nullptr && seg->bystander >= 0) {
        face = rng.perturbed(cast[static_cast<std::size_t>(seg->bystander)].prototype, c.sigma_f);
      } else {
        face = rng.unit_vector(c.visual_dim);
      }
      Vec values = g.values();
      for (double& v : values) v = std::clamp(round_to(v, 0.001), 0.0, 1.0);
      heatmaps.push_back({t, Grid(c.grid_rows, c.grid_cols, std::move(values))});
      faces.push_back({t, rounded(std::move(face), 1e-4)});
    }

    EpisodeManifest m;
    m.episode_id = ep_id;
    m.series_id = c.series_id;
    m.words = dir / "words.ndjson";
    m.laughter = dir / "laughter.ndjson";
    m.heatmaps = dir / "heatmaps.ndjson";
    m.faces = dir / "faces.ndjson";
    m.voice = dir / "voice.ndjson";
    m.truth = dir / "truth.ndjson";
    m.transcript = dir / "transcript.txt";
    m.voice_dim = c.voice_dim;
    m.visual_dim = c.visual_dim;
    m.heatmap_fps = c.heatmap_fps;
    m.models = {{"generator", "castline-synth"}, {"seed", c.seed}};

    write_file_atomic(m.words, serialize_words(words));
    write_file_atomic(m.laughter, serialize_laughter(laughter));
    write_file_atomic(m.heatmaps, serialize_heatmaps(heatmaps));
    write_file_atomic(m.faces, serialize_face_embeddings(faces));
    write_file_atomic(*m.voice, serialize_voice_embeddings(voice));
    write_file_atomic(*m.truth, truth);
    write_file_atomic(*m.transcript, transcript);
    write_file_atomic(dir / "manifest.json", manifest_to_json(m, dir).dump(2) + "\n");
    manifest_paths.push_back(ep_id + "/manifest.json");
  }

  ordered_json series;
  series["series_id"] = c.series_id;
  series["cast"] = ordered_json::array();
  for (const auto& ch : cast) {
    ordered_json entry;
    entry["id"] = ch.id;
    entry["name"] = ch.display_name;
    entry["aliases"] = {ch.alias};
    entry["prototype"] = ch.prototype;
    entry["episodes"] = episode_ids;
    series["cast"].push_back(entry);
  }
  series["episodes"] = manifest_paths;
  series["pipeline"] = ordered_json::object();
  const fs::path series_path = out_dir / "series.json";
  write_file_atomic(series_path, series.dump(2) + "\n");
  return series_path;
}

}  // namespace castline
