// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#include "castline/assigner.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace castline;

namespace {

Vec at_degrees(double deg) {
  const double r = deg * std::numbers::pi / 180.0;
  return {std::cos(r), std::sin(r)};
}

ExemplarRecord rec(int id, const char* who, Vec v) { return {id, "ep01", who, std::move(v)}; }

}  // namespace

TEST_CASE("centroid of unit vectors at 0, 10 and 20 degrees lies at 10 degrees") {
  const auto bank = build_centroids(std::vector<ExemplarRecord>{rec(0, "a", at_degrees(0)), rec(1, "a", at_degrees(10)),
                                                                rec(2, "a", at_degrees(20))});
  const Vec& c = bank.centroids.at("a");
  CHECK(std::atan2(c[1], c[0]) * 180.0 / std::numbers::pi == doctest::Approx(10.0).epsilon(1e-8));
  CHECK(std::hypot(c[0], c[1]) == doctest::Approx(1.0));
  CHECK(bank.counts.at("a") == 3);
}

TEST_CASE("centroids normalize before averaging") {
  // Without normalization the long vector would dominate.
  const auto bank = build_centroids(std::vector<ExemplarRecord>{rec(0, "a", {100, 0}), rec(1, "a", {0, 1})});
  const Vec& c = bank.centroids.at("a");
  CHECK(c[0] == doctest::Approx(c[1]));
  const auto one = build_centroids(std::vector<ExemplarRecord>{rec(0, "b", {3, 4})});
  CHECK(one.centroids.at("b")[0] == doctest::Approx(0.6));
}

TEST_CASE("antipodal exemplars drop the character") {
  std::vector<std::string> dropped;
  const auto bank = build_centroids(
      std::vector<ExemplarRecord>{rec(0, "a", {1, 0}), rec(1, "a", {-1, 0}), rec(2, "b", {0, 1})}, &dropped);
  CHECK(bank.centroids.count("a") == 0);
  CHECK(bank.centroids.count("b") == 1);
  CHECK(dropped == std::vector<std::string>{"a"});
}

TEST_CASE("nearest centroid with unknown cut-off") {
  CharacterBank bank;
  bank.centroids["b"] = {1, 0};
  bank.centroids["a"] = {0, 1};
  auto x = assign(Vec{2, 0}, bank, 0.4, 7);
  CHECK(x.label == "b");
  CHECK(x.distance == doctest::Approx(0.0));
  CHECK(x.segment_id == 7);
  // 1 - cos(84.26 deg) = 0.9
  x = assign(at_degrees(std::acos(0.1) * 180.0 / std::numbers::pi), bank, 0.4);
  CHECK(x.label == "a");
  x = assign(Vec{-1, -0.1}, bank, 0.4);
  CHECK(x.label == kUnknown);
  // Equidistant: the smaller id.
  x = assign(Vec{1, 1}, bank, 1.0);
  CHECK(x.label == "a");
  // Exactly at d is still named.
  x = assign(Vec{1, 1}, bank, x.distance);
  CHECK(x.label == "a");
  const auto empty = assign(Vec{1, 0}, CharacterBank{}, 2.0);
  CHECK(empty.label == kUnknown);
  CHECK(std::isinf(empty.distance));
}

TEST_CASE("assignment ignores positive scaling") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 1);
  CharacterBank bank;
  for (const char* id : {"a", "b", "c", "d"}) bank.centroids[id] = l2_normalize(Vec{n(rng), n(rng), n(rng)});
  for (int i = 0; i < 200; ++i) {
    Vec v{n(rng), n(rng), n(rng)};
    Vec w = v;
    for (double& x : w) x *= 1e3;
    CHECK(assign(v, bank, 0.5).label == assign(w, bank, 0.5).label);
  }
}

TEST_CASE("every exemplar names its own character on separated clusters") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0, 0.05);
  std::vector<ExemplarRecord> ex;
  const std::vector<Vec> centres = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  static const char* const kIds[] = {"a", "b", "c"};
  for (int i = 0; i < 60; ++i) {
    Vec v = centres[i % 3];
    for (double& x : v) x += n(rng);
    ex.push_back(rec(i, kIds[i % 3], v));
  }
  const auto bank = build_centroids(ex);
  for (const auto& e : ex) CHECK(assign(e.embedding, bank, 1.0).label == e.character_id);
}

TEST_CASE("sweep: POCS is 1 at d = 2 and never decreases") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 2);
  std::uniform_int_distribution<int> who(0, 2);
  static const char* const kIds[] = {"a", "b", "c"};
  std::vector<SweepEpisode> eps(2);
  for (auto& ep : eps) {
    for (int i = 0; i < 40; ++i) {
      const double s = i * 3.0;
      const double len = 0.5 + u(rng) * 2;
      ep.truth.push_back({s, s + len, kIds[who(rng)], ""});
      ep.segments.push_back({s, s + len, kIds[who(rng)], u(rng)});
    }
  }
  PipelineConfig cfg;
  const auto curve = sweep_thresholds(eps, cfg.sweep_grid(), 2.0);
  REQUIRE(curve.size() == 100);
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (i % 50 != 0) CHECK(curve[i].pocs >= curve[i - 1].pocs);
  }
  CHECK(curve[49].d == 2.0);
  CHECK(curve[49].pocs == 1.0);
  CHECK(curve[49].segment_class == "all");
  CHECK(curve[99].pocs == 1.0);
  CHECK(curve[99].segment_class == "long");
  // Nothing is closer than distance 0 here, so nothing is classified.
  CHECK(curve[0].precision == 1.0);

  const std::string tsv = format_curve(curve);
  CHECK(tsv.rfind("d\tpocs\tprecision\tclass\n", 0) == 0);
}

TEST_CASE("oracle point counts segments whose speaker has exemplars") {
  SweepEpisode ep;
  for (int i = 0; i < 10; ++i) {
    const char* who = i == 0 ? "z" : "a";
    ep.truth.push_back({i * 2.0, i * 2.0 + 1, who, ""});
    ep.segments.push_back({i * 2.0, i * 2.0 + 1, "a", 0.1});
  }
  ep.segments.push_back({100, 101, "a", 0.1});  // off the reference
  const std::vector<SweepEpisode> eps = {ep};
  const auto p = oracle_point(eps, {"a"});
  CHECK(p.pocs == doctest::Approx(9.0 / 11.0));
  CHECK(p.precision == 1.0);
  const auto none = oracle_point(eps, {});
  CHECK(none.pocs == 0.0);
  CHECK_FALSE(none.precision_defined);
}

TEST_CASE("assignment files round-trip") {
  const std::vector<SpeechSegment> segs = {{0, 0.5, 1.25, "Hi there.", 0, 2}, {1, 2, 3, "Who?", 2, 3}};
  const std::vector<Assignment> as = {{0, "jerry", 0.125}, {1, kUnknown, std::numeric_limits<double>::infinity()}};
  const std::string s = serialize_assignments(segs, as);
  CHECK(s.find("\"distance\":null") != std::string::npos);
  std::istringstream in(s);
  const auto back = parse_assignments(in);
  REQUIRE(back.size() == 2);
  CHECK(back[0].first.label == "jerry");
  CHECK(back[0].first.start == 0.5);
  CHECK(back[0].first.text == "Hi there.");
  CHECK(back[1].second.label == kUnknown);
  CHECK(std::isinf(back[1].second.distance));
}
