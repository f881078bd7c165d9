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

#include "privfill/rewriter.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "privfill/errors.hpp"
#include "privfill/logging.hpp"

namespace privfill {
namespace {

std::optional<std::string> label_from_json(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  const auto& v = j.at(key);
  return v.is_string() ? v.get<std::string>() : v.dump();
}

// Re-throws the active exception with the document/sentence prepended,
// keeping its category.
[[noreturn]] void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const DomainError& e) {
    throw DomainError(context + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(context + ": " + e.what());
  } catch (const std::exception& e) {
    throw BackendError(context + ": " + e.what());
  }
}

struct InfillResult {
  std::vector<std::string> outputs;
  std::vector<std::size_t> tokens;
};

// Shared loop of both infilling mechanisms. on_sentence runs after each
// sentence with its index and token count.
InfillResult infill_sentences(GenerativeModel& model, const Document& document, const GenerationLimits& limits,
                              const TokenSelector& select, Rng& rng,
                              const std::function<void(std::size_t, std::size_t)>& on_sentence) {
  document.validate();
  limits.validate();
  const auto spans = segment_sentences(document.text);
  if (spans.size() == 1) {
    log_warning("document " + document.id + " has a single sentence; its infill prompt is just [blank]");
  }
  InfillResult result;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    try {
      const std::string prompt = build_infill_prompt(document.text, spans, i);
      const TokenSequence encoded = encode_masked_prompt(model, prompt, limits.max_len);
      const TokenSequence generated = generate_tokens(model, prompt, encoded, limits.max_new_tokens, select, rng);
      result.outputs.emplace_back(trim(model.decode(generated)));
      result.tokens.push_back(generated.size());
      if (on_sentence) on_sentence(i, generated.size());
    } catch (...) {
      rethrow_with_context("document " + document.id + ", sentence " + std::to_string(i));
    }
  }
  return result;
}

}  // namespace

void Document::validate() const {
  if (is_blank(text)) throw DataError("document " + id + ": text is empty");
}

void to_json(nlohmann::json& j, const Document& doc) {
  j = nlohmann::json{{"id", doc.id}, {"text", doc.text}};
  if (doc.utility_label) j["utility_label"] = *doc.utility_label;
  if (doc.privacy_label) j["privacy_label"] = *doc.privacy_label;
}

void from_json(const nlohmann::json& j, Document& doc) {
  if (!j.is_object()) throw DataError("document record is not a JSON object");
  if (!j.contains("id") || !j.contains("text")) throw DataError("document record needs \"id\" and \"text\"");
  const auto& id = j.at("id");
  doc.id = id.is_string() ? id.get<std::string>() : id.dump();
  if (!j.at("text").is_string()) throw DataError("document " + doc.id + ": \"text\" must be a string");
  doc.text = j.at("text").get<std::string>();
  doc.utility_label = label_from_json(j, "utility_label");
  doc.privacy_label = label_from_json(j, "privacy_label");
}

void GenerationLimits::validate() const {
  if (max_len < 1) throw DomainError("max_len must be >= 1");
  if (max_new_tokens < 1) throw DomainError("max_new_tokens must be >= 1");
}

std::string_view to_string(Mechanism mechanism) {
  switch (mechanism) {
    case Mechanism::kPrivFill: return "privfill";
    case Mechanism::kPrivFillDp: return "privfill_dp";
    case Mechanism::kDpPrompt: return "dp_prompt";
  }
  return "unknown";
}

Mechanism parse_mechanism(std::string_view name) {
  if (name == "privfill") return Mechanism::kPrivFill;
  if (name == "privfill_dp") return Mechanism::kPrivFillDp;
  if (name == "dp_prompt") return Mechanism::kDpPrompt;
  throw UsageError("unknown mechanism '" + std::string(name) + "' (expected privfill, privfill_dp or dp_prompt)");
}

nlohmann::json to_record(const RewriteOutput& output, std::uint64_t seed) {
  nlohmann::json j;
  j["id"] = output.document_id;
  j["mechanism"] = output.mechanism_id;
  j["privatized_text"] = output.privatized_text;
  j["sentence_outputs"] = output.sentence_outputs;
  j["tokens_generated"] = output.tokens_generated;
  j["epsilon_per_token"] = output.epsilon_per_token ? nlohmann::json(*output.epsilon_per_token) : nlohmann::json();
  j["total_epsilon"] = output.total_epsilon ? nlohmann::json(*output.total_epsilon) : nlohmann::json();
  j["seed"] = seed;
  return j;
}

RewriteOutput from_record(const nlohmann::json& record) {
  RewriteOutput out;
  try {
    out.document_id = record.at("id").get<std::string>();
    out.mechanism_id = record.at("mechanism").get<std::string>();
    out.privatized_text = record.at("privatized_text").get<std::string>();
    out.sentence_outputs = record.at("sentence_outputs").get<std::vector<std::string>>();
    out.tokens_generated = record.at("tokens_generated").get<std::vector<std::size_t>>();
    if (!record.at("epsilon_per_token").is_null()) out.epsilon_per_token = record.at("epsilon_per_token").get<double>();
    if (!record.at("total_epsilon").is_null()) out.total_epsilon = record.at("total_epsilon").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("rewrite record: ") + e.what());
  }
  return out;
}

std::string concatenate_sentences(std::span<const std::string> fragments) {
  std::string out;
  for (const auto& f : fragments) {
    if (f.empty()) continue;
    if (!out.empty()) out += ' ';
    out += f;
  }
  return out;
}

std::string build_infill_prompt(std::string_view text, std::span<const SentenceSpan> spans, std::size_t index) {
  if (index >= spans.size()) {
    throw DomainError("sentence index " + std::to_string(index) + " out of range for " +
                      std::to_string(spans.size()) + " sentence(s)");
  }
  const SentenceSpan& s = spans[index];
  std::string prompt;
  prompt.reserve(text.size() + kBlankToken.size());
  prompt.append(text.substr(0, s.begin));
  prompt.append(kBlankToken);
  prompt.append(text.substr(s.end));
  return prompt;
}

std::string build_infill_prompt(const Document& document, std::size_t index) {
  const auto spans = segment_sentences(document.text);
  return build_infill_prompt(document.text, spans, index);
}

TokenSelector make_temperature_selector(double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw DomainError("sampling temperature must be positive and finite");
  }
  return [temperature](const Eigen::VectorXd& logits, Rng& rng) {
    return static_cast<TokenId>(sample_with_temperature(logits, temperature, rng));
  };
}

TokenSelector make_dp_selector(const ClipBounds& bounds, const PrivacySpec& spec) {
  bounds.validate();
  return [bounds, spec](const Eigen::VectorXd& logits, Rng& rng) {
    return static_cast<TokenId>(dp_select_token(logits, bounds, spec, rng));
  };
}

TokenSequence generate_tokens(GenerativeModel& model, std::string_view prompt_text, const TokenSequence& prompt,
                              int max_new_tokens, const TokenSelector& select, Rng& rng) {
  TokenSequence generated;
  const TokenId eos = model.eos_token();
  for (int step = 0; step < max_new_tokens; ++step) {
    const Eigen::VectorXd logits = model.next_logits({prompt_text, prompt, generated});
    if (logits.size() == 0) throw BackendError("model returned an empty logit vector");
    const TokenId next = select(logits, rng);
    if (next == eos) break;
    generated.push_back(next);
  }
  return generated;
}

RewriteOutput privfill_rewrite(GenerativeModel& model, const Document& document, const GenerationLimits& limits,
                               Rng& rng, const PrivFillOptions& options) {
  const TokenSelector select = make_temperature_selector(options.temperature);
  InfillResult r = infill_sentences(model, document, limits, select, rng, nullptr);
  RewriteOutput out;
  out.document_id = document.id;
  out.mechanism_id = std::string(to_string(Mechanism::kPrivFill));
  out.privatized_text = concatenate_sentences(r.outputs);
  out.sentence_outputs = std::move(r.outputs);
  out.tokens_generated = std::move(r.tokens);
  return out;
}

RewriteOutput privfill_dp_rewrite(GenerativeModel& model, const Document& document, const GenerationLimits& limits,
                                  const ClipBounds& bounds, const PrivacySpec& spec, BudgetLedger& ledger, Rng& rng) {
  const TokenSelector select = make_dp_selector(bounds, spec);
  BudgetLedger spent;
  InfillResult r = infill_sentences(model, document, limits, select, rng, [&](std::size_t index, std::size_t tokens) {
    BudgetEntry entry{document.id, index, tokens, spec.epsilon_per_token()};
    ledger.append(entry);
    spent.append(std::move(entry));
  });
  RewriteOutput out;
  out.document_id = document.id;
  out.mechanism_id = std::string(to_string(Mechanism::kPrivFillDp));
  out.privatized_text = concatenate_sentences(r.outputs);
  out.sentence_outputs = std::move(r.outputs);
  out.tokens_generated = std::move(r.tokens);
  out.epsilon_per_token = spec.epsilon_per_token();
  out.total_epsilon = total_epsilon(spent);
  return out;
}

RewriteOutput dp_prompt_rewrite(GenerativeModel& model, const Document& document, const GenerationLimits& limits,
                                const ClipBounds& bounds, const PrivacySpec& spec, BudgetLedger& ledger, Rng& rng,
                                std::string_view paraphrase_template) {
  document.validate();
  limits.validate();
  if (paraphrase_template.find("{text}") == std::string_view::npos) {
    throw DomainError("paraphrase template must contain {text}");
  }
  const TokenSelector select = make_dp_selector(bounds, spec);
  RewriteOutput out;
  out.document_id = document.id;
  out.mechanism_id = std::string(to_string(Mechanism::kDpPrompt));
  try {
    const std::string prompt = replace_all(paraphrase_template, "{text}", document.text);
    const auto cap = model.tokenize(document.text).size();
    const TokenSequence encoded = encode(model, prompt, limits.max_len);
    const TokenSequence generated = generate_tokens(model, prompt, encoded, static_cast<int>(cap), select, rng);
    out.sentence_outputs.emplace_back(trim(model.decode(generated)));
    out.tokens_generated.push_back(generated.size());
  } catch (...) {
    rethrow_with_context("document " + document.id);
  }
  BudgetEntry entry{document.id, 0, out.tokens_generated.front(), spec.epsilon_per_token()};
  ledger.append(entry);
  out.privatized_text = out.sentence_outputs.front();
  out.epsilon_per_token = spec.epsilon_per_token();
  out.total_epsilon = entry.epsilon();
  return out;
}

void RewriteConfig::validate() const {
  limits.validate();
  if (is_dp(mechanism)) {
    if (!bounds || !spec) {
      throw UsageError(std::string(to_string(mechanism)) + " requires an explicit epsilon, sensitivity and clip bounds");
    }
    bounds->validate();
  } else if (bounds || spec) {
    throw UsageError("privfill is not a DP mechanism; epsilon, sensitivity and clip bounds are not accepted");
  }
}

RewriteOutput rewrite_document(GenerativeModel& model, const Document& document, const RewriteConfig& config,
                               BudgetLedger& ledger, Rng& rng) {
  config.validate();
  switch (config.mechanism) {
    case Mechanism::kPrivFill:
      return privfill_rewrite(model, document, config.limits, rng, config.privfill);
    case Mechanism::kPrivFillDp:
      return privfill_dp_rewrite(model, document, config.limits, *config.bounds, *config.spec, ledger, rng);
    case Mechanism::kDpPrompt:
      return dp_prompt_rewrite(model, document, config.limits, *config.bounds, *config.spec, ledger, rng,
                               config.paraphrase_template);
  }
  throw UsageError("unknown mechanism");
}

std::vector<RewriteOutput> rewrite_corpus(std::span<const Document> documents, const ModelFactory& factory,
                                          const RewriteConfig& config, std::uint64_t seed, int workers,
                                          BudgetLedger& ledger) {
  config.validate();
  const std::size_t n = documents.size();
  std::vector<RewriteOutput> outputs(n);
  std::vector<BudgetLedger> ledgers(n);
  std::vector<std::exception_ptr> errors(n);
  std::vector<char> done(n, 0);
  std::exception_ptr factory_error;
  std::mutex factory_mutex;
  std::atomic<std::size_t> next{0};

  auto work = [&]() {
    std::unique_ptr<GenerativeModel> model;
    try {
      model = factory();
    } catch (...) {
      std::lock_guard<std::mutex> lock(factory_mutex);
      if (!factory_error) factory_error = std::current_exception();
      return;
    }
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        Rng rng = document_rng(seed, documents[i].id);
        outputs[i] = rewrite_document(*model, documents[i], config, ledgers[i], rng);
      } catch (...) {
        errors[i] = std::current_exception();
      }
      done[i] = 1;
    }
  };

  const int pool = std::max(1, std::min<int>(workers, static_cast<int>(std::max<std::size_t>(n, 1))));
  if (pool == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < pool; ++w) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    if (!done[i]) std::rethrow_exception(factory_error);
  }
  for (const auto& l : ledgers) ledger.merge(l);
  return outputs;
}

}  // namespace privfill
