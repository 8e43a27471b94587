// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#include "castline/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

namespace castline {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
  throw DataError("line " + std::to_string(line) + ": " + what);
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

// Calls fn(record, line_number) for every non-blank line.
template <typename Fn>
void for_each_record(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (blank(line)) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      fail_at(number, std::string("malformed record: ") + e.what());
    }
    if (!rec.is_object()) fail_at(number, "record is not an object");
    try {
      fn(rec, number);
    } catch (const json::exception& e) {
      fail_at(number, e.what());
    }
  }
}

const json& field(const json& rec, const char* name, std::size_t line) {
  auto it = rec.find(name);
  if (it == rec.end()) fail_at(line, std::string("missing field '") + name + "'");
  return *it;
}

double number(const json& rec, const char* name, std::size_t line) {
  const json& v = field(rec, name, line);
  if (!v.is_number()) fail_at(line, std::string("field '") + name + "' is not a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) fail_at(line, std::string("field '") + name + "' is not finite");
  return x;
}

Vec vector_field(const json& rec, const char* name, std::size_t line) {
  const json& v = field(rec, name, line);
  if (!v.is_array()) fail_at(line, std::string("field '") + name + "' is not an array");
  Vec out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) fail_at(line, std::string("non-numeric entry in '") + name + "'");
    out.push_back(x.get<double>());
  }
  if (!all_finite(out)) fail_at(line, std::string("non-finite entry in '") + name + "'");
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

bool closes_sentence(const std::string& raw, const std::vector<std::string>& abbreviations) {
  std::string w = trim(raw);
  while (!w.empty() && (w.back() == '"' || w.back() == '\'' || w.back() == ')' || w.back() == ']')) {
    w.pop_back();
  }
  const bool terminal = ends_with(w, ".") || ends_with(w, "?") || ends_with(w, "!") ||
                        ends_with(w, "\xE2\x80\xA6");
  if (!terminal) return false;
  std::string key = lower(w);
  while (!key.empty() && (key.front() == '"' || key.front() == '\'' || key.front() == '(')) {
    key.erase(key.begin());
  }
  return std::find(abbreviations.begin(), abbreviations.end(), key) == abbreviations.end();
}

template <typename Records, typename Fn>
std::string dump_lines(const Records& records, Fn&& to_record) {
  std::string out;
  for (const auto& r : records) {
    out += to_record(r).dump();
    out += '\n';
  }
  return out;
}

}  // namespace

std::vector<WordToken> parse_words(std::istream& in) {
  std::vector<WordToken> words;
  for_each_record(in, [&](const json& rec, std::size_t line) {
    WordToken w;
    const json& text = field(rec, "w", line);
    if (!text.is_string()) fail_at(line, "field 'w' is not a string");
    w.text = text.get<std::string>();
    if (trim(w.text).empty()) fail_at(line, "empty word text");
    w.start = number(rec, "s", line);
    w.end = number(rec, "e", line);
    if (rec.contains("c")) w.confidence = number(rec, "c", line);
    if (w.end < w.start) fail_at(line, "word end precedes start");
    if (w.confidence < 0.0 || w.confidence > 1.0) fail_at(line, "confidence outside [0,1]");
    if (!words.empty() && w.start < words.back().start) {
      fail_at(line, "word start times are not monotone");
    }
    words.push_back(std::move(w));
  });
  return words;
}

std::string serialize_words(std::span<const WordToken> words) {
  return dump_lines(words, [](const WordToken& w) {
    ordered_json j;
    j["w"] = w.text;
    j["s"] = w.start;
    j["e"] = w.end;
    j["c"] = w.confidence;
    return j;
  });
}

std::vector<LaughterInterval> parse_laughter(std::istream& in) {
  std::vector<LaughterInterval> out;
  for_each_record(in, [&](const json& rec, std::size_t line) {
    LaughterInterval l{number(rec, "s", line), number(rec, "e", line), number(rec, "score", line)};
    if (!(l.start < l.end)) fail_at(line, "laughter interval must have start < end");
    if (l.score < 0.0 || l.score > 1.0) fail_at(line, "laughter score outside [0,1]");
    out.push_back(l);
  });
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.start < b.start; });
  return out;
}

std::string serialize_laughter(std::span<const LaughterInterval> intervals) {
  return dump_lines(intervals, [](const LaughterInterval& l) {
    ordered_json j;
    j["s"] = l.start;
    j["e"] = l.end;
    j["score"] = l.score;
    return j;
  });
}

std::vector<HeatmapFrame> parse_heatmaps(std::istream& in) {
  std::vector<HeatmapFrame> out;
  for_each_record(in, [&](const json& rec, std::size_t line) {
    const double t = number(rec, "t", line);
    const json& h = field(rec, "h", line);
    const json& w = field(rec, "w", line);
    if (!h.is_number_integer() || !w.is_number_integer()) fail_at(line, "'h' and 'w' must be integers");
    const int rows = h.get<int>();
    const int cols = w.get<int>();
    if (rows < 1 || cols < 1) fail_at(line, "heatmap dimensions must be >= 1");
    Vec values = vector_field(rec, "v", line);
    if (values.size() != static_cast<std::size_t>(rows) * cols) {
      fail_at(line, "heatmap has " + std::to_string(values.size()) + " values, expected " +
                        std::to_string(rows * cols));
    }
    for (double x : values) {
      if (x < 0.0 || x > 1.0) fail_at(line, "heatmap value outside [0,1]");
    }
    if (!out.empty() && (out.front().grid.rows() != rows || out.front().grid.cols() != cols)) {
      fail_at(line, "heatmap shape differs from earlier frames");
    }
    out.push_back({t, Grid(rows, cols, std::move(values))});
  });
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return out;
}

std::string serialize_heatmaps(std::span<const HeatmapFrame> frames) {
  return dump_lines(frames, [](const HeatmapFrame& f) {
    ordered_json j;
    j["t"] = f.timestamp;
    j["h"] = f.grid.rows();
    j["w"] = f.grid.cols();
    j["v"] = f.grid.values();
    return j;
  });
}

std::vector<FaceFrame> parse_face_embeddings(std::istream& in, int dim) {
  std::vector<FaceFrame> out;
  std::size_t expected = dim > 0 ? static_cast<std::size_t>(dim) : 0;
  for_each_record(in, [&](const json& rec, std::size_t line) {
    FaceFrame f{number(rec, "t", line), vector_field(rec, "v", line)};
    if (f.embedding.empty()) fail_at(line, "empty face embedding");
    if (expected == 0) expected = f.embedding.size();
    if (f.embedding.size() != expected) {
      fail_at(line, "face embedding has dimension " + std::to_string(f.embedding.size()) +
                        ", expected " + std::to_string(expected));
    }
    out.push_back(std::move(f));
  });
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.timestamp < b.timestamp; });
  return out;
}

std::string serialize_face_embeddings(std::span<const FaceFrame> frames) {
  return dump_lines(frames, [](const FaceFrame& f) {
    ordered_json j;
    j["t"] = f.timestamp;
    j["v"] = f.embedding;
    return j;
  });
}

VoiceTable parse_voice_embeddings(std::istream& in, int dim) {
  VoiceTable out;
  std::size_t expected = dim > 0 ? static_cast<std::size_t>(dim) : 0;
  for_each_record(in, [&](const json& rec, std::size_t line) {
    const json& id = field(rec, "segment_id", line);
    if (!id.is_number_integer()) fail_at(line, "'segment_id' must be an integer");
    Vec v = vector_field(rec, "v", line);
    if (v.empty()) fail_at(line, "empty voice embedding");
    if (expected == 0) expected = v.size();
    if (v.size() != expected) {
      fail_at(line, "voice embedding has dimension " + std::to_string(v.size()) + ", expected " +
                        std::to_string(expected));
    }
    if (!(l2_norm(v) > 0.0)) fail_at(line, "zero voice embedding");
    if (!out.emplace(id.get<int>(), std::move(v)).second) {
      fail_at(line, "duplicate segment_id " + std::to_string(id.get<int>()));
    }
  });
  return out;
}

std::string serialize_voice_embeddings(const VoiceTable& table) {
  std::string out;
  for (const auto& [id, v] : table) {
    ordered_json j;
    j["segment_id"] = id;
    j["v"] = v;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<GTSegment> parse_gt(std::istream& in) {
  std::vector<GTSegment> out;
  for_each_record(in, [&](const json& rec, std::size_t line) {
    GTSegment g;
    g.start = number(rec, "s", line);
    g.end = number(rec, "e", line);
    const json& spk = field(rec, "speaker", line);
    if (!spk.is_string() || spk.get<std::string>().empty()) fail_at(line, "'speaker' must be a non-empty string");
    g.speaker = spk.get<std::string>();
    if (rec.contains("text")) g.text = rec["text"].get<std::string>();
    if (!(g.start < g.end)) fail_at(line, "ground-truth segment must have start < end");
    out.push_back(std::move(g));
  });
  return out;
}

std::string serialize_gt(std::span<const GTSegment> segments) {
  return dump_lines(segments, [](const GTSegment& g) {
    ordered_json j;
    j["s"] = g.start;
    j["e"] = g.end;
    j["speaker"] = g.speaker;
    j["text"] = g.text;
    return j;
  });
}

SegmentationOptions SegmentationOptions::from(const PipelineConfig& config) {
  SegmentationOptions o;
  o.abbreviations.clear();
  for (const auto& a : config.abbreviations) o.abbreviations.push_back(lower(a));
  o.max_word_gap = config.max_word_gap;
  return o;
}

std::vector<SpeechSegment> sentence_segments(std::span<const WordToken> words,
                                             const SegmentationOptions& options) {
  std::vector<SpeechSegment> segments;
  std::size_t begin = 0;
  auto close = [&](std::size_t end) {
    SpeechSegment s;
    s.id = static_cast<int>(segments.size());
    s.word_begin = begin;
    s.word_end = end;
    s.start = words[begin].start;
    s.end = words[end - 1].end;
    for (std::size_t i = begin; i < end; ++i) {
      if (i > begin) s.text += ' ';
      s.text += trim(words[i].text);
    }
    segments.push_back(std::move(s));
    begin = end;
  };
  for (std::size_t i = 0; i < words.size(); ++i) {
    const bool last = i + 1 == words.size();
    if (last || closes_sentence(words[i].text, options.abbreviations) ||
        words[i + 1].start - words[i].end > options.max_word_gap) {
      close(i + 1);
    }
  }
  return segments;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << contents;
    if (!out.flush()) throw DataError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

EpisodeManifest load_manifest(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": malformed manifest: " + e.what());
  }
  const fs::path base = path.parent_path();
  EpisodeManifest m;
  try {
    auto need = [&](const char* key) -> const json& {
      if (!doc.contains(key)) throw DataError(path.string() + ": manifest missing '" + key + "'");
      return doc[key];
    };
    m.episode_id = need("episode_id").get<std::string>();
    m.series_id = doc.value("series_id", std::string{});
    m.words = resolve(base, need("words").get<std::string>());
    m.laughter = resolve(base, need("laughter").get<std::string>());
    m.heatmaps = resolve(base, need("heatmaps").get<std::string>());
    m.faces = resolve(base, need("faces").get<std::string>());
    if (doc.contains("voice") && !doc["voice"].is_null()) m.voice = resolve(base, doc["voice"].get<std::string>());
    if (doc.contains("truth") && !doc["truth"].is_null()) m.truth = resolve(base, doc["truth"].get<std::string>());
    if (doc.contains("transcript") && !doc["transcript"].is_null()) {
      m.transcript = resolve(base, doc["transcript"].get<std::string>());
    }
    m.voice_dim = doc.value("voice_dim", 0);
    m.visual_dim = doc.value("visual_dim", 0);
    m.heatmap_fps = doc.value("heatmap_fps", 0.0);
    if (doc.contains("models")) m.models = doc["models"];
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  if (m.episode_id.empty()) throw DataError(path.string() + ": empty episode_id");
  return m;
}

ordered_json manifest_to_json(const EpisodeManifest& m, const fs::path& relative_to) {
  auto rel = [&](const fs::path& p) { return fs::relative(p, relative_to).generic_string(); };
  ordered_json j;
  j["episode_id"] = m.episode_id;
  j["series_id"] = m.series_id;
  j["words"] = rel(m.words);
  j["laughter"] = rel(m.laughter);
  j["heatmaps"] = rel(m.heatmaps);
  j["faces"] = rel(m.faces);
  if (m.voice) j["voice"] = rel(*m.voice);
  if (m.truth) j["truth"] = rel(*m.truth);
  if (m.transcript) j["transcript"] = rel(*m.transcript);
  j["voice_dim"] = m.voice_dim;
  j["visual_dim"] = m.visual_dim;
  j["heatmap_fps"] = m.heatmap_fps;
  if (!m.models.is_null()) j["models"] = m.models;
  return j;
}

namespace {

template <typename Fn>
auto parse_path(const fs::path& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing input file: " + path.string());
  try {
    return fn(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

int pinned_dim(int from_config, int from_manifest, const char* what, const std::string& episode) {
  if (from_config > 0 && from_manifest > 0 && from_config != from_manifest) {
    throw DataError("episode " + episode + ": " + what + " " + std::to_string(from_manifest) +
                    " does not match configured " + std::to_string(from_config));
  }
  return from_config > 0 ? from_config : from_manifest;
}

}  // namespace

Episode load_episode(const EpisodeManifest& manifest, const PipelineConfig& config,
                     bool require_voice, bool load_visual) {
  Episode ep;
  ep.manifest = manifest;
  const int voice_dim = pinned_dim(config.voice_dim, manifest.voice_dim, "voice_dim", manifest.episode_id);
  const int visual_dim = pinned_dim(config.visual_dim, manifest.visual_dim, "visual_dim", manifest.episode_id);

  ep.words = parse_path(manifest.words, [](std::istream& in) { return parse_words(in); });
  ep.segments = sentence_segments(ep.words, SegmentationOptions::from(config));
  ep.laughter = parse_path(manifest.laughter, [](std::istream& in) { return parse_laughter(in); });
  if (load_visual) {
    ep.heatmaps = parse_path(manifest.heatmaps, [](std::istream& in) { return parse_heatmaps(in); });
    ep.faces = parse_path(manifest.faces, [&](std::istream& in) { return parse_face_embeddings(in, visual_dim); });
  }
  if (manifest.voice) {
    ep.voice = parse_path(*manifest.voice, [&](std::istream& in) { return parse_voice_embeddings(in, voice_dim); });
  } else if (require_voice) {
    throw DataError("episode " + manifest.episode_id + ": manifest names no voice-embeddings file");
  }
  return ep;
}

}  // namespace castline
