/**
 * Copyright 2026 The gpuperf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <functional>
#include <string_view>

namespace gpuperf {

using WarningSink = std::function<void(std::string_view)>;

// Non-fatal diagnostics (clamped occupancy, out-of-range spec values, ...).
// The default sink writes "gpuperf: warning: <msg>" to stderr.
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

// RAII helper used by tests and by callers that want to collect warnings.
class ScopedWarningSink {
 public:
  explicit ScopedWarningSink(WarningSink sink);
  ~ScopedWarningSink();
  ScopedWarningSink(const ScopedWarningSink&) = delete;
  ScopedWarningSink& operator=(const ScopedWarningSink&) = delete;

 private:
  WarningSink previous_;
};

}  // namespace gpuperf
