// Copyright 2026 The castline Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace castline {

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

/// Verbosity from CASTLINE_LOG (error|warn|info|debug); warn when unset.
LogLevel log_level();
void set_log_level(LogLevel level);

/// Writes `level=<l> stage=<stage> [episode=<ep>] <fields>` to stderr.
void log(LogLevel level, std::string_view stage, std::string_view episode, std::string_view fields);

/// One count emitted by a pipeline stage for one episode.
struct StageEvent {
  std::string stage;
  std::string episode;
  long count = 0;
};

/// Thread-safe sink of stage counts; the yield report is built from these.
class StageLog {
 public:
  void record(std::string stage, std::string episode, long count);
  std::vector<StageEvent> events() const;
  long total(std::string_view stage) const;

 private:
  mutable std::mutex mu_;
  std::vector<StageEvent> events_;
};

}  // namespace castline
