// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#include "castline/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>

namespace castline {

namespace {

LogLevel level_from_env() {
  const char* env = std::getenv("CASTLINE_LOG");
  if (env == nullptr) return LogLevel::kWarn;
  const std::string v(env);
  if (v == "error") return LogLevel::kError;
  if (v == "info") return LogLevel::kInfo;
  if (v == "debug") return LogLevel::kDebug;
  return LogLevel::kWarn;
}

std::atomic<int>& level_slot() {
  static std::atomic<int> slot{static_cast<int>(level_from_env())};
  return slot;
}

std::mutex& stderr_mutex() {
  static std::mutex mu;
  return mu;
}

const char* level_name(LogLevel l) {
  switch (l) {
    case LogLevel::kError: return "error";
    case LogLevel::kWarn: return "warn";
    case LogLevel::kInfo: return "info";
    case LogLevel::kDebug: return "debug";
  }
  return "?";
}

}  // namespace

LogLevel log_level() { return static_cast<LogLevel>(level_slot().load()); }

void set_log_level(LogLevel level) { level_slot().store(static_cast<int>(level)); }

void log(LogLevel level, std::string_view stage, std::string_view episode, std::string_view fields) {
  if (static_cast<int>(level) > static_cast<int>(log_level())) return;
  std::string line = "level=";
  line += level_name(level);
  line += " stage=";
  line += stage;
  if (!episode.empty()) {
    line += " episode=";
    line += episode;
  }
  if (!fields.empty()) {
    line += ' ';
    line += fields;
  }
  line += '\n';
  std::lock_guard lock(stderr_mutex());
  std::cerr << line;
}

void StageLog::record(std::string stage, std::string episode, long count) {
  log(LogLevel::kInfo, stage, episode, "count=" + std::to_string(count));
  std::lock_guard lock(mu_);
  events_.push_back({std::move(stage), std::move(episode), count});
}

std::vector<StageEvent> StageLog::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

long StageLog::total(std::string_view stage) const {
  std::lock_guard lock(mu_);
  long sum = 0;
  for (const auto& e : events_) {
    if (e.stage == stage) sum += e.count;
  }
  return sum;
}

}  // namespace castline
