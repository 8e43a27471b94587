// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#include "castline/aligner.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace castline;

namespace {

std::vector<TranscriptWord> tw(const std::vector<std::pair<const char*, const char*>>& words) {
  std::vector<TranscriptWord> out;
  for (const auto& [w, s] : words) out.push_back({w, s});
  return out;
}

std::vector<WordToken> timed(const std::vector<const char*>& words) {
  std::vector<WordToken> out;
  double t = 0;
  for (const char* w : words) {
    out.push_back({w, t, t + 0.3, 1.0});
    t += 0.5;
  }
  return out;
}

}  // namespace

TEST_CASE("transcript lines map names through the alias table") {
  const AliasTable aliases = {{"JERRY", "jerry"}, {"GEORGE", "george"}, {"MR. COSTANZA", "frank"}};
  std::istringstream in("JERRY: Hello, Newman.\n\n  george :  Hi.  \nMr. Costanza: Serenity now!\n");
  const auto lines = parse_transcript(in, aliases);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0].speaker == "jerry");
  CHECK(lines[0].text == "Hello, Newman.");
  CHECK(lines[1].speaker == "george");
  CHECK(lines[1].text == "Hi.");
  CHECK(lines[2].speaker == "frank");
  CHECK(lines[2].line_index == 2);

  std::istringstream unknown("NEWMAN: Hello.\n");
  CHECK_THROWS_WITH_AS(parse_transcript(unknown, aliases), "transcript line 1: unknown speaker 'NEWMAN'", DataError);
  std::istringstream no_colon("JERRY Hello.\n");
  CHECK_THROWS_AS(parse_transcript(no_colon, aliases), DataError);
}

TEST_CASE("word normalization") {
  CHECK(normalize_word("Hello,") == "hello");
  CHECK(normalize_word("\"Don't!\"") == "don't");
  CHECK(normalize_word("...") == "");
}

TEST_CASE("identical sequences align diagonally with cost 0") {
  const auto t = tw({{"Hello", "a"}, {"there", "a"}, {"how", "b"}, {"are", "b"}, {"you?", "b"}});
  const auto w = timed({"hello", "there", "how", "are", "you"});
  const auto al = dtw_align(t, w);
  CHECK(al.cost == 0);
  REQUIRE(al.path.size() == 5);
  for (const auto& s : al.path) CHECK(s.move == Move::kDiagonal);
  CHECK(al.timed_speakers == std::vector<std::optional<std::string>>{"a", "a", "b", "b", "b"});
}

TEST_CASE("an inserted filler word inherits a neighbour's speaker") {
  const auto t = tw({{"well", "a"}, {"fine", "a"}, {"no", "b"}});
  const auto w = timed({"well", "um", "fine", "no"});
  const auto al = dtw_align(t, w);
  CHECK(al.cost == 1);
  CHECK(al.timed_speakers[1] == "a");
  CHECK(path_cost(al.path, t, w) == 1);
}

TEST_CASE("skipped timed words between speakers take the nearer one, the earlier on ties") {
  const auto t = tw({{"yes", "a"}, {"no", "b"}});
  const auto w = timed({"yes", "x", "no"});
  const auto al = dtw_align(t, w);
  CHECK(al.cost == 1);
  CHECK(al.timed_speakers == std::vector<std::optional<std::string>>{"a", "a", "b"});
}

TEST_CASE("empty input is an error") {
  CHECK_THROWS_AS(dtw_align({}, timed({"a"})), DataError);
  CHECK_THROWS_AS(dtw_align(tw({{"a", "x"}}), {}), DataError);
}

TEST_CASE("DTW matches exhaustive path search") {
  static const char* const kVocab[] = {"a", "b", "c", "A", "b.", "the", "um"};
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> len(1, 10);
  std::uniform_int_distribution<int> word(0, 6);
  std::uniform_int_distribution<int> who(0, 2);
  static const char* const kWho[] = {"x", "y", "z"};
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<TranscriptWord> t;
    std::vector<const char*> raw;
    for (int i = len(rng); i > 0; --i) t.push_back({kVocab[word(rng)], kWho[who(rng)]});
    for (int i = len(rng); i > 0; --i) raw.push_back(kVocab[word(rng)]);
    const auto w = timed(raw);
    const auto al = dtw_align(t, w);
    CAPTURE(trial);
    CHECK(al.cost == oracle::dtw_cost(t, w));
    CHECK(oracle::valid_path(al.path, t.size(), w.size()));
    CHECK(path_cost(al.path, t, w) == al.cost);
    CHECK(al.timed_speakers == oracle::speakers_from_path(al.path, t, w.size()));
  }
}

TEST_CASE("ground-truth segments by majority vote") {
  const std::vector<SpeechSegment> segs = {{0, 0, 1, "", 0, 3}, {1, 2, 3, "", 3, 5}, {2, 4, 5, "", 5, 6},
                                           {3, 6, 7, "", 6, 10}};
  const std::vector<std::optional<std::string>> spk = {"a", "a", "b", "b", "a", std::nullopt, "b", "b", "b",
                                                       std::nullopt};
  std::vector<AlignStep> path;
  for (std::size_t i = 0; i < spk.size(); ++i) {
    if (spk[i]) path.push_back({Move::kDiagonal, i, i});
  }
  const auto gt = words_to_gt_segments(spk, path, segs);
  REQUIRE(gt.segments.size() == 3);
  CHECK(gt.segments[0].speaker == "a");
  // Tie between b and a: the first voter wins.
  CHECK(gt.segments[1].speaker == "b");
  CHECK(gt.segments[2].speaker == "b");
  CHECK(gt.segments[2].start == 6);
  const std::string review = format_review(gt.review);
  CHECK(review.find("segment 0") != std::string::npos);
  CHECK(review.find("segment 2") != std::string::npos);
}
