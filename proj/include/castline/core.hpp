// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace castline {

// Engine math is double precision regardless of how vectors are stored on disk.
using Vec = std::vector<double>;

/// Raised for malformed or inconsistent input data. The CLI maps it to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Label used for segments the assigner refuses to name.
inline const std::string kUnknown = "UNKNOWN";

struct WordToken {
  std::string text;
  double start = 0.0;
  double end = 0.0;
  double confidence = 1.0;
};

/// A sentence-level unit of speech. Words are [word_begin, word_end) into the
/// episode word list.
struct SpeechSegment {
  int id = 0;
  double start = 0.0;
  double end = 0.0;
  std::string text;
  std::size_t word_begin = 0;
  std::size_t word_end = 0;

  double duration() const { return end - start; }
};

struct LaughterInterval {
  double start = 0.0;
  double end = 0.0;
  double score = 0.0;
};

/// Dense row-major matrix used for heatmaps.
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}
  Grid(int rows, int cols, std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double at(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  double& at(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  const std::vector<double>& values() const { return data_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

struct HeatmapFrame {
  double timestamp = 0.0;
  Grid grid;
};

struct Peak {
  int row = 0;
  int col = 0;
  double value = 0.0;

  bool operator==(const Peak&) const = default;
};
using PeakSet = std::vector<Peak>;

struct FaceFrame {
  double timestamp = 0.0;
  Vec embedding;
};

struct CastEntry {
  std::string character_id;
  std::string display_name;
  Vec prototype;  // L2-normalized on load
  std::set<std::string> episodes;
  std::vector<std::string> aliases;  // transcript speaker names
};

struct ExemplarRecord {
  int segment_id = 0;
  std::string episode_id;
  std::string character_id;
  Vec embedding;
};

struct CharacterBank {
  std::map<std::string, Vec> centroids;
  std::map<std::string, int> counts;

  bool empty() const { return centroids.empty(); }
};

struct Assignment {
  int segment_id = 0;
  std::string label;
  double distance = std::numeric_limits<double>::infinity();
};

struct GTSegment {
  double start = 0.0;
  double end = 0.0;
  std::string speaker;
  std::string text;
};

/// A hypothesis segment: time span plus label (possibly UNKNOWN).
struct LabelledSegment {
  double start = 0.0;
  double end = 0.0;
  std::string label;
  std::string text;
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

/// Throws DataError on a zero (or non-finite) vector.
Vec l2_normalize(std::span<const double> v);

/// dot(a,b)/(|a||b|), clamped to [-1, 1]. Throws on dimension mismatch or zero norm.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

/// 1 - cosine_similarity, always within [0, 2].
double cosine_distance(std::span<const double> a, std::span<const double> b);

bool all_finite(std::span<const double> v);

/// Length of the intersection of [a0,a1] and [b0,b1]; zero when disjoint.
inline double overlap(double a0, double a1, double b0, double b1) {
  const double lo = a0 > b0 ? a0 : b0;
  const double hi = a1 < b1 ? a1 : b1;
  return hi > lo ? hi - lo : 0.0;
}

}  // namespace castline
