/**
 * Copyright 2026 The Sparse Forge Authors
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


#ifndef SFORGE_CLI_HPP_
#define SFORGE_CLI_HPP_

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sforge/io.hpp"

namespace sforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitIo = 2;

/// Settings read from a --config file. Command-line flags win over these.
struct RunConfig {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;
  std::optional<std::string> out;
  /// Module parameters keyed by flag name with dashes as underscores
  /// (e.g. "micro_batches"), plus an optional "router" object using
  /// RouterConfig field names.
  io::Json params = io::Json::object();
};

/// Parses a JSON config; unknown keys and malformed JSON raise InvalidInput.
RunConfig parse_config(const std::string &text);
RunConfig load_config(const std::string &path);

/// Runs one command. `args` excludes the program name. Data goes to `out`
/// (or the --out file), diagnostics to `err`.
int dispatch(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace sforge::cli

#endif  // SFORGE_CLI_HPP_
