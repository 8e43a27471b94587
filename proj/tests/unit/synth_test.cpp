// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#include "castline/ingest.hpp"
#include "castline/synth.hpp"

#include "../support/testing.hpp"

#include <doctest.h>

#include <json.hpp>

#include <stdexcept>

using namespace castline;
using castline::testing::TempDir;

namespace {

SynthConfig small(SynthConfig c) {
  c.n_episodes = 2;
  c.segments_per_episode = 40;
  return c;
}

}  // namespace

TEST_CASE("same seed, same bytes; different seed, different bytes") {
  TempDir a, b, c;
  generate(small(SynthConfig::noisy(4)), a.path());
  generate(small(SynthConfig::noisy(4)), b.path());
  generate(small(SynthConfig::noisy(5)), c.path());
  CHECK(testing::tree(a.path()) == testing::tree(b.path()));
  CHECK(testing::tree(a.path()) != testing::tree(c.path()));
}

TEST_CASE("generated episodes load and match their truth") {
  TempDir dir;
  const auto series = generate(small(SynthConfig::easy(2)), dir.path());
  const auto doc = nlohmann::json::parse(read_file(series));
  CHECK(doc["cast"].size() == 8);
  REQUIRE(doc["episodes"].size() == 2);
  const auto m = load_manifest(dir.path() / doc["episodes"][0].get<std::string>());
  CHECK(m.truth.has_value());
  CHECK(m.transcript.has_value());
  const auto ep = load_episode(m, PipelineConfig{}, true);
  // The sentence splitter recovers the planted segments exactly.
  REQUIRE(ep.segments.size() == 40);
  std::ifstream truth(*m.truth);
  const auto gt = parse_gt(truth);
  REQUIRE(gt.size() == 40);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    CHECK(ep.segments[i].start == gt[i].start);
    CHECK(ep.segments[i].end == gt[i].end);
  }
  CHECK(ep.voice.size() == 40);
  CHECK(ep.heatmaps.size() == ep.faces.size());
  CHECK(ep.heatmaps.front().grid.rows() == 16);
}

TEST_CASE("impossible settings are rejected") {
  auto bad = [](auto edit) {
    SynthConfig c = SynthConfig::easy();
    edit(c);
    return c;
  };
  CHECK_NOTHROW(validate(SynthConfig::noisy()));
  CHECK_THROWS_AS(validate(bad([](SynthConfig& c) { c.n_characters = 0; })), std::invalid_argument);
  CHECK_THROWS_AS(validate(bad([](SynthConfig& c) { c.sigma_v = -1; })), std::invalid_argument);
  CHECK_THROWS_AS(validate(bad([](SynthConfig& c) { c.heatmap_noise = 0.8; })), std::invalid_argument);
  CHECK_THROWS_AS(validate(bad([](SynthConfig& c) {
                    c.multi_speaker_fraction = 0.6;
                    c.offscreen_fraction = 0.6;
                  })),
                  std::invalid_argument);
  CHECK_THROWS_AS(validate(bad([](SynthConfig& c) { c.heatmap_fps = 1; })), std::invalid_argument);
  CHECK_THROWS_AS(validate(bad([](SynthConfig& c) {
                    c.multi_speaker_fraction = 0.2;
                    c.grid_rows = 3;
                    c.grid_cols = 3;
                  })),
                  std::invalid_argument);
}
