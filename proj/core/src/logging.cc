// Copyright 2026 The draftlat Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "draftlat/logging.h"

#include <atomic>
#include <cstdio>
#include <cstdlib>

namespace draftlat {
namespace {

LogLevel InitialLevel() {
  const char* env = std::getenv("DRAFTLAT_LOG");
  LogLevel level = LogLevel::kWarning;
  if (env != nullptr) ParseLogLevel(env, &level);
  return level;
}

std::atomic<LogLevel>& LevelSlot() {
  static std::atomic<LogLevel> level{InitialLevel()};
  return level;
}

const char* LevelName(LogLevel level) {
  switch (level) {
    case LogLevel::kDebug:
      return "DEBUG";
    case LogLevel::kInfo:
      return "INFO";
    case LogLevel::kWarning:
      return "WARNING";
    case LogLevel::kError:
      return "ERROR";
    case LogLevel::kOff:
      return "OFF";
  }
  return "?";
}

}  // namespace

LogLevel GetLogLevel() { return LevelSlot().load(std::memory_order_relaxed); }

void SetLogLevel(LogLevel level) {
  LevelSlot().store(level, std::memory_order_relaxed);
}

bool ParseLogLevel(const std::string& name, LogLevel* level) {
  if (name == "debug") {
    *level = LogLevel::kDebug;
  } else if (name == "info") {
    *level = LogLevel::kInfo;
  } else if (name == "warn" || name == "warning") {
    *level = LogLevel::kWarning;
  } else if (name == "error") {
    *level = LogLevel::kError;
  } else if (name == "off" || name == "none") {
    *level = LogLevel::kOff;
  } else {
    return false;
  }
  return true;
}

namespace internal {

void LogMessage(LogLevel level, const std::string& message) {
  if (level < GetLogLevel() || level == LogLevel::kOff) return;
  std::fprintf(stderr, "[draftlat %s] %s\n", LevelName(level), message.c_str());
}

}  // namespace internal
}  // namespace draftlat
