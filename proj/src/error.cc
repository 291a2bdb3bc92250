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

#include "cat/error.h"

namespace cat {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kShape:
      return "SHAPE_ERROR";
    case ErrorKind::kSpecInvalid:
      return "SPEC_INVALID";
    case ErrorKind::kParse:
      return "PARSE_ERROR";
    case ErrorKind::kSchemaMismatch:
      return "SCHEMA_MISMATCH";
    case ErrorKind::kNumerical:
      return "NUMERICAL_FAILURE";
    case ErrorKind::kExpansionUnsupported:
      return "EXPANSION_UNSUPPORTED";
    case ErrorKind::kIo:
      return "IO_ERROR";
    case ErrorKind::kInvalidArgument:
      return "INVALID_ARGUMENT";
  }
  return "UNKNOWN";
}

int ExitCodeFor(ErrorKind kind) {
  return kind == ErrorKind::kNumerical ? 3 : 2;
}

}  // namespace cat
