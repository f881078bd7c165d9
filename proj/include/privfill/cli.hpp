//
// Copyright 2026 The PrivFill Authors
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
//

// The privfill command line: prep, calibrate, rewrite, evaluate, report,
// infill-data and train-manifest.

#ifndef PRIVFILL_CLI_HPP_
#define PRIVFILL_CLI_HPP_

#include <ostream>
#include <span>
#include <string>

#include "json.hpp"
#include "privfill/corpus_prep.hpp"
#include "privfill/toolkit.hpp"

namespace privfill {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitData = 3,
  kExitBackend = 4,
};

// Built-in label tasks for the JSONL sources; --labels replaces them.
LabelTaskSpec default_label_task(std::string_view source);
// Trustpilot keeps reviews with two or more sentences; the rest keep all.
int default_min_sentences(std::string_view source);

// `args` excludes the program name. Never throws.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err, const Environment& env);

}  // namespace privfill

#endif  // PRIVFILL_CLI_HPP_
