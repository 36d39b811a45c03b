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

#ifndef DRAFTLAT_LOGGING_H_
#define DRAFTLAT_LOGGING_H_

#include <sstream>
#include <string>

namespace draftlat {

enum class LogLevel { kDebug = 0, kInfo = 1, kWarning = 2, kError = 3, kOff = 4 };

// The process-wide log threshold. Initialized once from the DRAFTLAT_LOG
// environment variable (debug|info|warn|error|off; default warn) and
// overridable programmatically.
LogLevel GetLogLevel();
void SetLogLevel(LogLevel level);

// Parses a level name; returns false and leaves *level untouched on junk.
bool ParseLogLevel(const std::string& name, LogLevel* level);

namespace internal {

void LogMessage(LogLevel level, const std::string& message);

// Stream-style sink that emits on destruction, so callers can write
// DRAFTLAT_LOG_LINE(kWarning) << "count=" << n;
class LogLine {
 public:
  explicit LogLine(LogLevel level) : level_(level) {}
  ~LogLine() { LogMessage(level_, stream_.str()); }
  template <typename T>
  LogLine& operator<<(const T& value) {
    stream_ << value;
    return *this;
  }

 private:
  LogLevel level_;
  std::ostringstream stream_;
};

}  // namespace internal
}  // namespace draftlat

#define DRAFTLAT_LOG_LINE(severity) \
  ::draftlat::internal::LogLine(::draftlat::LogLevel::severity)

#endif  // DRAFTLAT_LOGGING_H_
