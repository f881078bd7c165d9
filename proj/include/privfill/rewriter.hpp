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

// Document rewriting mechanisms.
//
//  * privfill:    every sentence is masked in turn with [blank] and replaced
//                 by the model's sampled infill.
//  * privfill_dp: the same loop, with every generated token drawn by the
//                 clipped-logit exponential mechanism.
//  * dp_prompt:   one zero-shot paraphrase of the whole document, decoded
//                 with the same DP token selector and capped at the original
//                 document's token length.

#ifndef PRIVFILL_REWRITER_HPP_
#define PRIVFILL_REWRITER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "privfill/dp_mechanism.hpp"
#include "privfill/model.hpp"
#include "privfill/random.hpp"
#include "privfill/text.hpp"

namespace privfill {

struct Document {
  std::string id;
  std::string text;
  std::optional<std::string> utility_label;
  std::optional<std::string> privacy_label;

  // Throws DataError if the text is blank.
  void validate() const;
};

void to_json(nlohmann::json& j, const Document& doc);
void from_json(const nlohmann::json& j, Document& doc);

struct GenerationLimits {
  int max_len = 512;
  int max_new_tokens = 32;

  void validate() const;
};

enum class Mechanism { kPrivFill, kPrivFillDp, kDpPrompt };

std::string_view to_string(Mechanism mechanism);
Mechanism parse_mechanism(std::string_view name);
inline bool is_dp(Mechanism m) { return m != Mechanism::kPrivFill; }

struct RewriteOutput {
  std::string document_id;
  std::string mechanism_id;
  std::vector<std::string> sentence_outputs;
  std::string privatized_text;
  std::vector<std::size_t> tokens_generated;
  std::optional<double> epsilon_per_token;
  std::optional<double> total_epsilon;
};

// One line of the rewrite output file.
nlohmann::json to_record(const RewriteOutput& output, std::uint64_t seed);
RewriteOutput from_record(const nlohmann::json& record);

inline constexpr std::string_view kDefaultParaphraseTemplate =
    "Paraphrase the following document: {text}\nParaphrase:";

// Non-empty fragments joined by single spaces.
std::string concatenate_sentences(std::span<const std::string> fragments);

// Text with the span at `index` replaced by [blank]; everything else is
// left byte-identical. Masking is by position, so duplicate sentences are
// handled correctly.
std::string build_infill_prompt(std::string_view text, std::span<const SentenceSpan> spans, std::size_t index);
std::string build_infill_prompt(const Document& document, std::size_t index);

// Chooses the next token from raw logits.
using TokenSelector = std::function<TokenId(const Eigen::VectorXd& logits, Rng& rng)>;

// Multinomial sampling from softmax(logits / temperature); non-private.
TokenSelector make_temperature_selector(double temperature);

// dp_select_token with fixed bounds and budget. Both DP mechanisms use this.
TokenSelector make_dp_selector(const ClipBounds& bounds, const PrivacySpec& spec);

// Decodes up to max_new_tokens tokens, stopping early at end-of-sequence.
// The returned sequence excludes the end-of-sequence token.
TokenSequence generate_tokens(GenerativeModel& model, std::string_view prompt_text, const TokenSequence& prompt,
                              int max_new_tokens, const TokenSelector& select, Rng& rng);

struct PrivFillOptions {
  double temperature = 1.0;
};

RewriteOutput privfill_rewrite(GenerativeModel& model, const Document& document, const GenerationLimits& limits,
                               Rng& rng, const PrivFillOptions& options = {});

RewriteOutput privfill_dp_rewrite(GenerativeModel& model, const Document& document, const GenerationLimits& limits,
                                  const ClipBounds& bounds, const PrivacySpec& spec, BudgetLedger& ledger, Rng& rng);

// limits.max_len truncates the prompt; limits.max_new_tokens is not used
// because the cap is the document's own token length.
RewriteOutput dp_prompt_rewrite(GenerativeModel& model, const Document& document, const GenerationLimits& limits,
                                const ClipBounds& bounds, const PrivacySpec& spec, BudgetLedger& ledger, Rng& rng,
                                std::string_view paraphrase_template = kDefaultParaphraseTemplate);

struct RewriteConfig {
  Mechanism mechanism = Mechanism::kPrivFill;
  GenerationLimits limits;
  std::optional<ClipBounds> bounds;
  std::optional<PrivacySpec> spec;
  PrivFillOptions privfill;
  std::string paraphrase_template = std::string(kDefaultParaphraseTemplate);

  // DP mechanisms need bounds and spec; privfill must have neither.
  void validate() const;
};

RewriteOutput rewrite_document(GenerativeModel& model, const Document& document, const RewriteConfig& config,
                               BudgetLedger& ledger, Rng& rng);

// Rewrites documents on `workers` threads, one model session per worker.
// Document i uses document_rng(seed, id) and a private ledger; ledgers are
// merged into `ledger` in input order, so results do not depend on the
// worker count.
std::vector<RewriteOutput> rewrite_corpus(std::span<const Document> documents, const ModelFactory& factory,
                                          const RewriteConfig& config, std::uint64_t seed, int workers,
                                          BudgetLedger& ledger);

}  // namespace privfill

#endif  // PRIVFILL_REWRITER_HPP_
