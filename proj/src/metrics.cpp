// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#include "castline/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <unordered_map>

namespace castline {

double DerBreakdown::rate() const {
  return scored_reference > 0.0 ? (missed + false_alarm + confusion) / scored_reference : 0.0;
}

DerBreakdown& DerBreakdown::operator+=(const DerBreakdown& o) {
  scored_reference += o.scored_reference;
  missed += o.missed;
  false_alarm += o.false_alarm;
  confusion += o.confusion;
  return *this;
}

DerBreakdown der_breakdown(std::span<const GTSegment> reference,
                           std::span<const LabelledSegment> hypothesis, const DerOptions& options) {
  if (reference.empty()) throw DataError("DER needs a non-empty reference");

  std::vector<double> ref_bounds;
  for (const auto& r : reference) {
    ref_bounds.push_back(r.start);
    ref_bounds.push_back(r.end);
  }
  std::vector<double> cuts;
  for (double b : ref_bounds) {
    cuts.push_back(b - options.collar);
    cuts.push_back(b);
    cuts.push_back(b + options.collar);
  }
  for (const auto& h : hypothesis) {
    cuts.push_back(h.start);
    cuts.push_back(h.end);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  DerBreakdown out;
  std::set<std::string> ref_active;
  std::set<std::string> hyp_active;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double hi = cuts[i + 1];
    const double mid = 0.5 * (lo + hi);
    const double dur = hi - lo;
    if (options.collar > 0.0 &&
        std::any_of(ref_bounds.begin(), ref_bounds.end(),
                    [&](double b) { return mid > b - options.collar && mid < b + options.collar; })) {
      continue;
    }
    ref_active.clear();
    hyp_active.clear();
    for (const auto& r : reference) {
      if (r.start < mid && mid < r.end) ref_active.insert(r.speaker);
    }
    if (!options.include_overlap && ref_active.size() >= 2) continue;
    for (const auto& h : hypothesis) {
      if (h.start < mid && mid < h.end && !(options.unknown_as_miss && h.label == kUnknown)) {
        hyp_active.insert(h.label);
      }
    }
    const double n_ref = static_cast<double>(ref_active.size());
    const double n_hyp = static_cast<double>(hyp_active.size());
    double n_correct = 0.0;
    for (const auto& s : ref_active) {
      if (s != kUnknown && hyp_active.count(s) > 0) n_correct += 1.0;
    }
    out.scored_reference += dur * n_ref;
    out.missed += dur * std::max(0.0, n_ref - n_hyp);
    out.false_alarm += dur * std::max(0.0, n_hyp - n_ref);
    out.confusion += dur * (std::min(n_ref, n_hyp) - n_correct);
  }
  if (!(out.scored_reference > 0.0)) throw DataError("DER: no reference speech left after the collar");
  return out;
}

double der(std::span<const GTSegment> reference, std::span<const LabelledSegment> hypothesis,
           const DerOptions& options) {
  return der_breakdown(reference, hypothesis, options).rate();
}

std::optional<std::size_t> best_reference(double start, double end, std::span<const GTSegment> reference) {
  std::optional<std::size_t> best;
  double best_overlap = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double ov = overlap(start, end, reference[i].start, reference[i].end);
    if (ov > best_overlap) {
      best_overlap = ov;
      best = i;
    }
  }
  return best;
}

bool is_true_positive(const LabelledSegment& hyp, std::span<const GTSegment> reference) {
  const auto best = best_reference(hyp.start, hyp.end, reference);
  return best && hyp.label != kUnknown && reference[*best].speaker == hyp.label;
}

AccuracyCounts accuracy_counts(std::span<const LabelledSegment> hypothesis,
                               std::span<const GTSegment> reference) {
  AccuracyCounts c;
  for (const auto& h : hypothesis) {
    const auto best = best_reference(h.start, h.end, reference);
    if (!best) continue;
    ++c.overlapping;
    if (h.label != kUnknown && reference[*best].speaker == h.label) ++c.correct;
  }
  return c;
}

double accuracy_on_overlap(std::span<const LabelledSegment> hypothesis,
                           std::span<const GTSegment> reference) {
  const auto c = accuracy_counts(hypothesis, reference);
  if (c.overlapping == 0) throw DataError("accuracy: no hypothesis segment overlaps the reference");
  return static_cast<double>(c.correct) / static_cast<double>(c.overlapping);
}

CharacterCountTable character_counts(std::span<const LabelledSegment> hypothesis,
                                     std::span<const GTSegment> reference) {
  CharacterCountTable table;
  std::vector<bool> recalled(reference.size(), false);
  for (const auto& r : reference) ++table[r.speaker].support;
  for (const auto& h : hypothesis) {
    if (h.label == kUnknown) continue;
    auto& row = table[h.label];
    ++row.predicted;
    const auto best = best_reference(h.start, h.end, reference);
    if (best && reference[*best].speaker == h.label) {
      ++row.true_pos;
      recalled[*best] = true;
    }
  }
  for (std::size_t i = 0; i < reference.size(); ++i) {
    if (recalled[i]) ++table[reference[i].speaker].recalled;
  }
  return table;
}

void merge_counts(CharacterCountTable& into, const CharacterCountTable& from) {
  for (const auto& [id, c] : from) {
    auto& row = into[id];
    row.predicted += c.predicted;
    row.true_pos += c.true_pos;
    row.support += c.support;
    row.recalled += c.recalled;
  }
}

PerCharacterResult finalize_per_character(const CharacterCountTable& counts) {
  PerCharacterResult out;
  double p_sum = 0.0;
  long p_n = 0;
  double r_sum = 0.0;
  long r_n = 0;
  for (const auto& [id, c] : counts) {
    if (c.support == 0) continue;
    CharacterScore s;
    s.character = id;
    s.support = c.support;
    s.recall = static_cast<double>(c.recalled) / static_cast<double>(c.support);
    if (c.predicted > 0) {
      s.precision = static_cast<double>(c.true_pos) / static_cast<double>(c.predicted);
      p_sum += *s.precision;
      ++p_n;
    }
    r_sum += s.recall;
    ++r_n;
    out.table.push_back(std::move(s));
  }
  out.ppc = p_n > 0 ? p_sum / static_cast<double>(p_n) : 0.0;
  out.rpc = r_n > 0 ? r_sum / static_cast<double>(r_n) : 0.0;
  return out;
}

PerCharacterResult per_character_pr(std::span<const LabelledSegment> hypothesis,
                                    std::span<const GTSegment> reference) {
  return finalize_per_character(character_counts(hypothesis, reference));
}

namespace {

const std::unordered_map<std::string, std::vector<std::string>>& contractions() {
  static const std::unordered_map<std::string, std::vector<std::string>> table = {
      {"won't", {"will", "not"}},  {"can't", {"can", "not"}},   {"shan't", {"shall", "not"}},
      {"let's", {"let", "us"}},    {"gonna", {"going", "to"}},  {"wanna", {"want", "to"}},
      {"gotta", {"got", "to"}},    {"gimme", {"give", "me"}},   {"lemme", {"let", "me"}},
      {"y'all", {"you", "all"}},
  };
  return table;
}

const char* const kDigitWords[] = {"zero", "one", "two", "three", "four",
                                   "five", "six", "seven", "eight", "nine"};

}  // namespace

std::vector<std::string> normalize_text(std::string_view text) {
  // Curly apostrophes become ASCII; other punctuation becomes a separator.
  std::string flat;
  flat.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (c == 0xE2 && i + 2 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0x80 &&
        (static_cast<unsigned char>(text[i + 2]) == 0x98 || static_cast<unsigned char>(text[i + 2]) == 0x99)) {
      flat += '\'';
      i += 2;
    } else if (c < 0x80 && std::ispunct(c) && c != '\'') {
      flat += ' ';
    } else if (c < 0x80) {
      flat += static_cast<char>(std::tolower(c));
    } else {
      flat += static_cast<char>(c);
    }
  }

  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < flat.size()) {
    while (i < flat.size() && std::isspace(static_cast<unsigned char>(flat[i]))) ++i;
    std::size_t j = i;
    while (j < flat.size() && !std::isspace(static_cast<unsigned char>(flat[j]))) ++j;
    std::string w = flat.substr(i, j - i);
    i = j;
    while (!w.empty() && w.front() == '\'') w.erase(w.begin());
    while (!w.empty() && w.back() == '\'') w.pop_back();
    if (w.empty()) continue;
    if (auto it = contractions().find(w); it != contractions().end()) {
      words.insert(words.end(), it->second.begin(), it->second.end());
    } else if (w.size() == 1 && w[0] >= '0' && w[0] <= '9') {
      words.emplace_back(kDigitWords[w[0] - '0']);
    } else {
      words.push_back(std::move(w));
    }
  }
  return words;
}

EditCounts& EditCounts::operator+=(const EditCounts& o) {
  substitutions += o.substitutions;
  insertions += o.insertions;
  deletions += o.deletions;
  reference_words += o.reference_words;
  return *this;
}

EditCounts word_edit_counts(std::span<const std::string> ref, std::span<const std::string> hyp) {
  struct Cell {
    long cost = 0;
    long sub = 0;
    long ins = 0;
    long del = 0;
  };
  const std::size_t m = ref.size();
  const std::size_t n = hyp.size();
  std::vector<Cell> prev(n + 1);
  std::vector<Cell> cur(n + 1);
  for (std::size_t j = 1; j <= n; ++j) prev[j] = {static_cast<long>(j), 0, static_cast<long>(j), 0};
  for (std::size_t i = 1; i <= m; ++i) {
    cur[0] = {static_cast<long>(i), 0, 0, static_cast<long>(i)};
    for (std::size_t j = 1; j <= n; ++j) {
      const bool same = ref[i - 1] == hyp[j - 1];
      Cell diag = prev[j - 1];
      diag.cost += same ? 0 : 1;
      diag.sub += same ? 0 : 1;
      Cell del = prev[j];
      del.cost += 1;
      del.del += 1;
      Cell ins = cur[j - 1];
      ins.cost += 1;
      ins.ins += 1;
      Cell best = diag;
      if (del.cost < best.cost) best = del;
      if (ins.cost < best.cost) best = ins;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  const Cell& last = prev[n];
  return {last.sub, last.ins, last.del, static_cast<long>(m)};
}

double wer(std::string_view reference, std::string_view hypothesis) {
  const auto ref = normalize_text(reference);
  const auto hyp = normalize_text(hypothesis);
  if (ref.empty()) throw DataError("WER needs a non-empty reference");
  const auto c = word_edit_counts(ref, hyp);
  return static_cast<double>(c.errors()) / static_cast<double>(c.reference_words);
}

std::string format_metrics_table(std::span<const MetricsReport> rows) {
  std::string out;
  char line[200];
  std::snprintf(line, sizeof line, "%-16s %8s %8s %8s %8s %8s %8s\n", "Episode", "DER", "DER(O)",
                "Acc", "Ppc", "Rpc", "WER");
  out += line;
  for (const auto& r : rows) {
    char with_overlap[32];
    if (std::isnan(r.der_with_overlap)) std::snprintf(with_overlap, sizeof with_overlap, "-");
    else std::snprintf(with_overlap, sizeof with_overlap, "%.1f", r.der_with_overlap);
    std::snprintf(line, sizeof line, "%-16s %8.1f %8s %8.1f %8.3f %8.3f %8.1f\n", r.name.c_str(), r.der,
                  with_overlap, r.accuracy, r.ppc, r.rpc, r.wer);
    out += line;
  }
  return out;
}

std::string format_character_table(const MetricsReport& report) {
  std::string out;
  char line[200];
  std::snprintf(line, sizeof line, "%-20s %10s %10s %8s\n", "Character", "Precision", "Recall", "Support");
  out += line;
  for (const auto& s : report.per_character) {
    char precision[32];
    if (s.precision) std::snprintf(precision, sizeof precision, "%.3f", *s.precision);
    else std::snprintf(precision, sizeof precision, "-");
    std::snprintf(line, sizeof line, "%-20s %10s %10.3f %8ld\n", s.character.c_str(), precision,
                  s.recall, s.support);
    out += line;
  }
  return out;
}

}  // namespace castline
