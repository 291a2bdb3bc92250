/*
 * Copyright 2026 The CAT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CAT_ERROR_H_
#define CAT_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace cat {

// Error classes double as the machine-parsable tag printed by the CLI.
enum class ErrorKind {
  kShape,
  kSpecInvalid,
  kParse,
  kSchemaMismatch,
  kNumerical,
  kExpansionUnsupported,
  kIo,
  kInvalidArgument,
};

std::string_view ErrorKindName(ErrorKind kind);

// 2 for user/input errors, 3 for numerical failures.
int ExitCodeFor(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(detail), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void Fail(ErrorKind kind, const std::string& detail) {
  throw Error(kind, detail);
}

}  // namespace cat

#endif  // CAT_ERROR_H_
