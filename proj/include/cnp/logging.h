// Copyright 2026 The CNP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CNP_LOGGING_H_
#define CNP_LOGGING_H_

#include <functional>
#include <string>

namespace cnp {

enum class LogLevel { kInfo, kWarning };

using LogSink = std::function<void(LogLevel, const std::string&)>;

// Replaces the process-wide sink (stderr by default). Returns the previous
// sink. Passing an empty function restores the default.
LogSink SetLogSink(LogSink sink);

void LogInfo(const std::string& message);
void LogWarning(const std::string& message);

}  // namespace cnp

#endif  // CNP_LOGGING_H_
