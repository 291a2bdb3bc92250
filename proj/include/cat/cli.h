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

#ifndef CAT_CLI_H_
#define CAT_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace cat {

// Entry point of the `cat` tool. `args` excludes the program name. Returns
// the process exit code: 0 on success, 2 for input errors, 3 for numerical
// failures. On error the first line written to `err` is "CLASS: detail".
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cat

#endif  // CAT_CLI_H_
