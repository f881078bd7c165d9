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

// Dataset preparation: Enron sent-mail cleaning, author and sentence-count
// filters, and label-task builders for review/abstract corpora.

#ifndef PRIVFILL_CORPUS_PREP_HPP_
#define PRIVFILL_CORPUS_PREP_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "privfill/rewriter.hpp"

namespace privfill {

struct RawEmail {
  std::string id;  // message path relative to the maildir root
  std::string user;
  std::string folder;
  std::string body;
};

enum class DropReason { kForwarded, kReuters, kEmpty, kTooFewSentences, kInfrequentAuthor };

std::string_view to_string(DropReason reason);

struct CleanResult {
  std::optional<std::string> text;
  std::optional<DropReason> dropped;
};

const std::vector<std::string>& default_signoffs();

// Cleaning steps, in order:
//   1. cut at the first "--Original Message--" (and the dashes before it);
//   2. drop if "Forwarded" or "Reuters" occurs as a whole word (case-sensitive);
//   3. drop everything up to and including the last '\r';
//   4. keep only the text before the first "From:";
//   5. cut at the first line that starts with a signoff (case-insensitive);
//   6. cut after the last '.', '!' or '?', if there is one;
//   7. drop if nothing but whitespace is left.
// Step 6 also runs after a signoff cut, which makes the cleaner idempotent.
// A signoff matches when the line starts with it and it ends in ',' or is
// followed by end of line, trailing spaces, or one of ",.!;:-".
CleanResult clean_enron_email(const RawEmail& raw, std::span<const std::string> signoffs = default_signoffs());

// True when some line of `text` begins with a signoff under the rule above.
bool has_signoff_line(std::string_view text, std::span<const std::string> signoffs = default_signoffs());

struct PrepStats {
  std::size_t input_count = 0;
  std::size_t dropped_forwarded = 0;
  std::size_t dropped_reuters = 0;
  std::size_t dropped_empty = 0;
  std::size_t dropped_short = 0;
  std::size_t dropped_infrequent = 0;
  std::size_t output_count = 0;

  void record_drop(DropReason reason);
  std::size_t dropped_total() const;
  bool conserved() const { return output_count + dropped_total() == input_count; }
  PrepStats& operator+=(const PrepStats& other);
};

void to_json(nlohmann::json& j, const PrepStats& stats);

struct DropRecord {
  std::string user;
  DropReason reason;
};

// {"user": ..., "reason": ...}
void to_json(nlohmann::json& j, const DropRecord& record);

struct AuthoredText {
  std::string user;
  std::string text;
};

struct FrequentAuthors {
  std::vector<std::size_t> kept;  // indices into the input, in input order
  std::size_t threshold = 0;
  std::vector<std::string> users;  // kept users, sorted
};

// Nearest-rank percentile of the per-user counts: with counts sorted
// ascending c_1..c_n, threshold = c_k for k = ceil(percentile / 100 * n).
// Users with count >= threshold are kept.
std::size_t nearest_rank_percentile(std::vector<std::size_t> values, double percentile);

FrequentAuthors filter_frequent_authors(std::span<const AuthoredText> texts, double percentile = 80.0);

// Documents with at least `minimum` segmented sentences.
std::vector<Document> min_sentence_filter(std::span<const Document> documents, int minimum = 2);

// Reads root/<user>/<folder>/... message files. Message files are split at
// the first blank line and only the body is kept. Results are sorted by id.
std::vector<RawEmail> read_maildir(const std::string& root, std::string_view folder = "sent_items");

struct EnronPrepOptions {
  int min_sentences = 2;
  double percentile = 80.0;
  std::vector<std::string> signoffs = default_signoffs();
};

struct EnronPrepResult {
  std::vector<Document> documents;  // privacy_label = user
  std::vector<DropRecord> drops;
  PrepStats stats;
  std::size_t threshold = 0;
  std::vector<std::string> users;
};

// clean -> sentence filter -> frequent-author filter.
EnronPrepResult prepare_enron(std::span<const RawEmail> emails, const EnronPrepOptions& options = {});

// How one label column is turned into a document label.
struct LabelRule {
  std::string field;
  bool first_of_list = true;  // lists contribute their first element
  std::map<std::string, std::string> mapping;  // empty = identity
  bool strict = false;  // unmapped values are errors instead of drops
  std::optional<std::size_t> top_k;  // keep the k most frequent labels
};

struct LabelTaskSpec {
  std::string text_field = "text";
  std::string id_field;  // empty: the record index is the id
  std::optional<LabelRule> utility;
  std::optional<LabelRule> privacy;
  std::optional<double> sample_fraction;
  std::uint64_t seed = 42;
};

void from_json(const nlohmann::json& j, LabelRule& rule);
void from_json(const nlohmann::json& j, LabelTaskSpec& spec);

// Records failing a partial mapping, with an empty label list, or outside
// the top-k are dropped; blank texts are dropped. Under a strict mapping,
// unknown values raise DataError naming up to ten offenders. Sampling keeps
// floor(fraction * N) records chosen by a seeded shuffle, in input order.
std::vector<Document> build_label_task(std::span<const nlohmann::json> records, const LabelTaskSpec& spec);

}  // namespace privfill

#endif  // PRIVFILL_CORPUS_PREP_HPP_
