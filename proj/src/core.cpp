// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#include "castline/core.hpp"

#include <algorithm>
#include <cmath>

namespace castline {

Grid::Grid(int rows, int cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (rows < 1 || cols < 1 || data_.size() != static_cast<std::size_t>(rows) * cols) {
    throw DataError("grid shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                    " does not match " + std::to_string(data_.size()) + " values");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DataError("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

Vec l2_normalize(std::span<const double> v) {
  const double n = l2_norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) throw DataError("cannot normalize a zero or non-finite vector");
  Vec out(v.begin(), v.end());
  for (double& x : out) x /= n;
  return out;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  const double d = dot(a, b);
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (!(na > 0.0) || !(nb > 0.0)) throw DataError("cosine similarity of a zero-norm vector");
  return std::clamp(d / (na * nb), -1.0, 1.0);
}

double cosine_distance(std::span<const double> a, std::span<const double> b) {
  return 1.0 - cosine_similarity(a, b);
}

}  // namespace castline
