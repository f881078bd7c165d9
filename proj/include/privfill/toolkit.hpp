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

// Configuration, run manifests and file plumbing shared by the commands.

#ifndef PRIVFILL_TOOLKIT_HPP_
#define PRIVFILL_TOOLKIT_HPP_

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "privfill/dp_mechanism.hpp"
#include "privfill/http_model.hpp"
#include "privfill/model.hpp"
#include "privfill/rewriter.hpp"

namespace privfill {

// Process environment, injectable for tests.
class Environment {
 public:
  Environment() = default;
  explicit Environment(std::map<std::string, std::string> vars) : vars_(std::move(vars)) {}
  static Environment from_process();

  std::optional<std::string> get(const std::string& name) const;
  void set(const std::string& name, std::string value) { vars_[name] = std::move(value); }

 private:
  std::map<std::string, std::string> vars_;
};

inline constexpr const char* kConfigEnv = "TOOLKIT_CONFIG";
inline constexpr const char* kCacheDirEnv = "TOOLKIT_CACHE_DIR";
inline constexpr const char* kModelEndpointEnv = "TOOLKIT_MODEL_ENDPOINT";
// Fixes manifest timestamps, following the reproducible-builds convention.
inline constexpr const char* kSourceDateEpochEnv = "SOURCE_DATE_EPOCH";

struct RetryPolicy {
  int attempts = 3;
  int delay_ms = 200;
  int timeout_seconds = 60;
};

// Every key is optional; command-line flags win over environment
// variables, which win over the file.
struct ToolkitConfig {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> backend;
  std::optional<std::string> mechanism;
  std::optional<double> epsilon;
  std::optional<double> sensitivity;
  std::optional<double> temperature;
  std::optional<double> logit_min;
  std::optional<double> logit_max;
  std::optional<int> max_len;
  std::optional<int> max_new_tokens;
  std::optional<std::string> paraphrase_template;
  std::optional<std::string> trainer;
  std::optional<std::string> embedder;
  std::optional<std::string> scorer;
  std::optional<std::string> cache_dir;
  RetryPolicy retry;
};

// Throws UsageError on unknown keys or wrongly typed values.
void from_json(const nlohmann::json& j, ToolkitConfig& config);

// Reads `path` (or $TOOLKIT_CONFIG when path is empty), then applies
// TOOLKIT_CACHE_DIR and TOOLKIT_MODEL_ENDPOINT.
ToolkitConfig load_config(const std::optional<std::string>& path, const Environment& env);

// "stub:<fixture.json>" or an http:// endpoint. Stub fixtures are read once;
// every call of the factory builds an independent session.
ModelFactory make_model_factory(const std::string& backend, const RetryPolicy& retry = {});

// UTC, "YYYY-MM-DDTHH:MM:SSZ". Uses SOURCE_DATE_EPOCH when set.
std::string run_timestamp(const Environment& env);

struct BudgetTotals {
  std::size_t entries = 0;
  std::size_t tokens_generated = 0;
  std::optional<double> total_epsilon;  // DP mechanisms only
};

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 42;
  nlohmann::json parameters = nlohmann::json::object();
  std::map<std::string, std::string> providers;
  std::string input;
  std::string output;  // file name, relative to the manifest
  std::string started_at;
  std::string finished_at;
  std::size_t documents = 0;
  BudgetTotals budget;
};

void to_json(nlohmann::json& j, const RunManifest& manifest);
void from_json(const nlohmann::json& j, RunManifest& manifest);

// 16 hex digits of FNV-1a over the compact JSON dump. Not cryptographic.
std::string config_hash(const nlohmann::json& parameters);

// Totals recomputed from rewrite records: entries are the per-sentence
// counts of DP outputs.
BudgetTotals budget_from_outputs(std::span<const RewriteOutput> outputs);

// JSON Lines. Blank lines are skipped; `line` is 1-based.
void read_jsonl(const std::string& path, const std::function<void(const nlohmann::json&, std::size_t line)>& sink);
// Like read_jsonl, but malformed lines go to `on_error` instead of throwing.
std::size_t read_jsonl_lenient(const std::string& path,
                               const std::function<void(const nlohmann::json&, std::size_t line)>& sink,
                               const std::function<void(std::size_t line, const std::string& error)>& on_error);

std::vector<Document> read_documents(const std::string& path);
// Accepts rewrite records ("privatized_text") or plain documents.
std::vector<Document> read_rewritten(const std::string& path);

// Rewritten documents carrying the labels of `originals`. Throws DataError
// listing the first 10 positions whose ids disagree.
std::vector<Document> align_rewritten(std::span<const Document> originals, std::span<const Document> rewritten);

std::string to_jsonl(std::span<const nlohmann::json> records);

// Writes through a temporary file and a rename; creates parent directories.
void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace privfill

#endif  // PRIVFILL_TOOLKIT_HPP_
