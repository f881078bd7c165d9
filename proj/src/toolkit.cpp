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

#include "privfill/toolkit.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "privfill/errors.hpp"
#include "privfill/random.hpp"
#include "privfill/stub_model.hpp"
#include "privfill/text.hpp"

extern char** environ;

namespace privfill {

namespace fs = std::filesystem;
using nlohmann::json;

Environment Environment::from_process() {
  std::map<std::string, std::string> vars;
  for (char** e = environ; e && *e; ++e) {
    const std::string_view entry(*e);
    const auto eq = entry.find('=');
    if (eq != std::string_view::npos) vars.emplace(entry.substr(0, eq), entry.substr(eq + 1));
  }
  return Environment(std::move(vars));
}

std::optional<std::string> Environment::get(const std::string& name) const {
  const auto it = vars_.find(name);
  if (it == vars_.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

namespace {

template <typename T>
void read_key(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace

void from_json(const json& j, ToolkitConfig& c) {
  static const std::set<std::string> kKeys = {
      "seed",      "workers",        "backend",  "mechanism", "epsilon",   "sensitivity", "temperature",
      "logit_min", "logit_max",      "max_len",  "max_new_tokens", "paraphrase_template",   "trainer",
      "embedder",  "scorer",         "cache_dir", "retry"};
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.contains(key)) throw UsageError("unknown config key '" + key + "'");
  }
  try {
    read_key(j, "seed", c.seed);
    read_key(j, "workers", c.workers);
    read_key(j, "backend", c.backend);
    read_key(j, "mechanism", c.mechanism);
    read_key(j, "epsilon", c.epsilon);
    read_key(j, "sensitivity", c.sensitivity);
    read_key(j, "temperature", c.temperature);
    read_key(j, "logit_min", c.logit_min);
    read_key(j, "logit_max", c.logit_max);
    read_key(j, "max_len", c.max_len);
    read_key(j, "max_new_tokens", c.max_new_tokens);
    read_key(j, "paraphrase_template", c.paraphrase_template);
    read_key(j, "trainer", c.trainer);
    read_key(j, "embedder", c.embedder);
    read_key(j, "scorer", c.scorer);
    read_key(j, "cache_dir", c.cache_dir);
    if (j.contains("retry")) {
      const json& r = j.at("retry");
      for (const auto& [key, value] : r.items()) {
        if (key != "attempts" && key != "delay_ms" && key != "timeout_seconds") {
          throw UsageError("unknown retry key '" + key + "'");
        }
      }
      c.retry.attempts = r.value("attempts", c.retry.attempts);
      c.retry.delay_ms = r.value("delay_ms", c.retry.delay_ms);
      c.retry.timeout_seconds = r.value("timeout_seconds", c.retry.timeout_seconds);
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad config: ") + e.what());
  }
  if (c.retry.attempts < 1 || c.retry.delay_ms < 0 || c.retry.timeout_seconds < 1) {
    throw UsageError("retry needs attempts >= 1, delay_ms >= 0 and timeout_seconds >= 1");
  }
}

ToolkitConfig load_config(const std::optional<std::string>& path, const Environment& env) {
  ToolkitConfig config;
  const std::optional<std::string> file = path ? path : env.get(kConfigEnv);
  if (file) {
    std::ifstream in(*file);
    if (!in) throw UsageError("cannot read config '" + *file + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw UsageError("config '" + *file + "' is not valid JSON: " + e.what());
    }
    config = j.get<ToolkitConfig>();
  }
  if (auto dir = env.get(kCacheDirEnv)) config.cache_dir = std::move(dir);
  if (auto endpoint = env.get(kModelEndpointEnv)) config.backend = std::move(endpoint);
  return config;
}

ModelFactory make_model_factory(const std::string& backend, const RetryPolicy& retry) {
  if (backend.starts_with("stub:")) {
    const std::string path = backend.substr(5);
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read stub fixture '" + path + "'");
    json fixture;
    try {
      in >> fixture;
    } catch (const json::exception& e) {
      throw UsageError("stub fixture '" + path + "' is not valid JSON: " + e.what());
    }
    StubModel::from_json(fixture);  // validate once, up front
    return [fixture] { return std::make_unique<StubModel>(StubModel::from_json(fixture)); };
  }
  if (backend.starts_with("http://")) {
    HttpModelOptions options{retry.attempts, retry.delay_ms, retry.timeout_seconds};
    return [backend, options] { return std::make_unique<HttpModel>(backend, options); };
  }
  throw UsageError("unknown backend '" + backend + "' (expected stub:<path> or http://host:port)");
}

std::string run_timestamp(const Environment& env) {
  std::time_t t = 0;
  if (const auto fixed = env.get(kSourceDateEpochEnv)) {
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(fixed->data(), fixed->data() + fixed->size(), v);
    if (ec != std::errc() || ptr != fixed->data() + fixed->size() || v < 0) {
      throw UsageError(std::string(kSourceDateEpochEnv) + " must be a non-negative integer");
    }
    t = static_cast<std::time_t>(v);
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void to_json(json& j, const RunManifest& m) {
  j = json{{"command", m.command},
           {"config_hash", m.config_hash},
           {"seed", m.seed},
           {"parameters", m.parameters},
           {"providers", m.providers},
           {"input", m.input},
           {"output", m.output},
           {"started_at", m.started_at},
           {"finished_at", m.finished_at},
           {"documents", m.documents},
           {"budget",
            {{"entries", m.budget.entries},
             {"tokens_generated", m.budget.tokens_generated},
             {"total_epsilon", m.budget.total_epsilon ? json(*m.budget.total_epsilon) : json(nullptr)}}}};
}

void from_json(const json& j, RunManifest& m) {
  try {
    m.command = j.at("command").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.parameters = j.at("parameters");
    m.providers = j.at("providers").get<std::map<std::string, std::string>>();
    m.input = j.at("input").get<std::string>();
    m.output = j.at("output").get<std::string>();
    m.started_at = j.at("started_at").get<std::string>();
    m.finished_at = j.at("finished_at").get<std::string>();
    m.documents = j.at("documents").get<std::size_t>();
    const json& b = j.at("budget");
    m.budget.entries = b.at("entries").get<std::size_t>();
    m.budget.tokens_generated = b.at("tokens_generated").get<std::size_t>();
    m.budget.total_epsilon.reset();
    if (!b.at("total_epsilon").is_null()) m.budget.total_epsilon = b.at("total_epsilon").get<double>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
}

std::string config_hash(const json& parameters) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(parameters.dump())));
  return buf;
}

BudgetTotals budget_from_outputs(std::span<const RewriteOutput> outputs) {
  BudgetTotals totals;
  for (const auto& o : outputs) {
    for (std::size_t t : o.tokens_generated) totals.tokens_generated += t;
    if (o.epsilon_per_token) {
      totals.entries += o.tokens_generated.size();
      totals.total_epsilon = totals.total_epsilon.value_or(0.0) + o.total_epsilon.value_or(0.0);
    }
  }
  return totals;
}

namespace {

std::ifstream open_input(const std::string& path) {
  if (fs::is_directory(path)) throw DataError("'" + path + "' is a directory, expected a file");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path + "'");
  return in;
}

}  // namespace

void read_jsonl(const std::string& path, const std::function<void(const json&, std::size_t)>& sink) {
  read_jsonl_lenient(path, sink, [&path](std::size_t line, const std::string& error) {
    throw DataError(path + ":" + std::to_string(line) + ": " + error);
  });
}

std::size_t read_jsonl_lenient(const std::string& path, const std::function<void(const json&, std::size_t)>& sink,
                               const std::function<void(std::size_t, const std::string&)>& on_error) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t number = 0;
  std::size_t records = 0;
  while (std::getline(in, line)) {
    ++number;
    if (is_blank(line)) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      on_error(number, std::string("invalid JSON: ") + e.what());
      continue;
    }
    ++records;
    sink(j, number);
  }
  return records;
}

std::vector<Document> read_documents(const std::string& path) {
  std::vector<Document> docs;
  read_jsonl(path, [&](const json& j, std::size_t line) {
    try {
      docs.push_back(j.get<Document>());
    } catch (const std::exception& e) {
      throw DataError(path + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return docs;
}

std::vector<Document> read_rewritten(const std::string& path) {
  std::vector<Document> docs;
  read_jsonl(path, [&](const json& j, std::size_t line) {
    try {
      if (j.is_object() && j.contains("privatized_text")) {
        const RewriteOutput out = from_record(j);
        docs.push_back({out.document_id, out.privatized_text, std::nullopt, std::nullopt});
      } else {
        docs.push_back(j.get<Document>());
      }
    } catch (const std::exception& e) {
      throw DataError(path + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return docs;
}

std::vector<Document> align_rewritten(std::span<const Document> originals, std::span<const Document> rewritten) {
  std::vector<std::string> offenders;
  std::size_t mismatches = 0;
  const std::size_t n = std::max(originals.size(), rewritten.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::string expected = i < originals.size() ? originals[i].id : "<none>";
    const std::string got = i < rewritten.size() ? rewritten[i].id : "<none>";
    if (expected == got) continue;
    ++mismatches;
    if (offenders.size() < 10) {
      offenders.push_back("line " + std::to_string(i + 1) + ": expected '" + expected + "', got '" + got + "'");
    }
  }
  if (mismatches > 0) {
    std::string message = std::to_string(mismatches) + " id mismatch(es) between original and rewritten files";
    for (const auto& o : offenders) message += "\n  " + o;
    throw DataError(message);
  }
  std::vector<Document> aligned;
  aligned.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Document d = originals[i];
    d.text = rewritten[i].text;
    aligned.push_back(std::move(d));
  }
  return aligned;
}

std::string to_jsonl(std::span<const json> records) {
  std::string out;
  for (const auto& r : records) out += r.dump() + "\n";
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw DataError("cannot write '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in = open_input(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace privfill
