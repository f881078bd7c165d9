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

#include "privfill/corpus_prep.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "privfill/errors.hpp"
#include "privfill/random.hpp"
#include "privfill/text.hpp"

namespace privfill {

using nlohmann::json;

std::string_view to_string(DropReason reason) {
  switch (reason) {
    case DropReason::kForwarded:
      return "forwarded";
    case DropReason::kReuters:
      return "reuters";
    case DropReason::kEmpty:
      return "empty";
    case DropReason::kTooFewSentences:
      return "too_few_sentences";
    case DropReason::kInfrequentAuthor:
      return "infrequent_author";
  }
  return "unknown";
}

const std::vector<std::string>& default_signoffs() {
  static const std::vector<std::string> kSignoffs = {
      "Best",    "All the best", "Best wishes",  "Best regards", "Sincerely",
      "Respectfully", "Regards", "Warm regards", "Kind regards", "Thank you,",
      "Thank you in advance,", "Talk to you soon,", "Thanks,"};
  return kSignoffs;
}

namespace {

constexpr std::string_view kOriginalMessage = "--Original Message--";

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

bool contains_word(std::string_view text, std::string_view word) {
  for (std::size_t pos = text.find(word); pos != std::string_view::npos; pos = text.find(word, pos + 1)) {
    const bool left = pos == 0 || !is_word_char(text[pos - 1]);
    const std::size_t after = pos + word.size();
    const bool right = after == text.size() || !is_word_char(text[after]);
    if (left && right) return true;
  }
  return false;
}

bool iequals_prefix(std::string_view text, std::string_view prefix) {
  if (text.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(text[i])) != std::tolower(static_cast<unsigned char>(prefix[i]))) {
      return false;
    }
  }
  return true;
}

bool signoff_at(std::string_view line, std::string_view signoff) {
  if (!iequals_prefix(line, signoff)) return false;
  if (signoff.ends_with(',')) return true;
  std::size_t q = signoff.size();
  if (q == line.size()) return true;
  if (std::string_view(",.!;:-").find(line[q]) != std::string_view::npos) return true;
  while (q < line.size() && (line[q] == ' ' || line[q] == '\t' || line[q] == '\r')) ++q;
  return q == line.size();
}

// Start of the first line that opens with a signoff, or npos.
std::size_t find_signoff_line(std::string_view text, std::span<const std::string> signoffs) {
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    const std::size_t indent = line.find_first_not_of(" \t");
    if (indent != std::string_view::npos) {
      line.remove_prefix(indent);
      for (const auto& s : signoffs) {
        if (!s.empty() && signoff_at(line, s)) return start;
      }
    }
    start = end + 1;
  }
  return std::string_view::npos;
}

}  // namespace

bool has_signoff_line(std::string_view text, std::span<const std::string> signoffs) {
  return find_signoff_line(text, signoffs) != std::string_view::npos;
}

CleanResult clean_enron_email(const RawEmail& raw, std::span<const std::string> signoffs) {
  std::string_view text = raw.body;

  if (const auto cut = text.find(kOriginalMessage); cut != std::string_view::npos) {
    text = text.substr(0, cut);
    while (!text.empty() && text.back() == '-') text.remove_suffix(1);
  }
  if (contains_word(text, "Forwarded")) return {std::nullopt, DropReason::kForwarded};
  if (contains_word(text, "Reuters")) return {std::nullopt, DropReason::kReuters};

  if (const auto cr = text.rfind('\r'); cr != std::string_view::npos) text.remove_prefix(cr + 1);
  if (const auto from = text.find("From:"); from != std::string_view::npos) text = text.substr(0, from);
  if (const auto line = find_signoff_line(text, signoffs); line != std::string_view::npos) {
    text = text.substr(0, line);
  }
  if (const auto punct = text.find_last_of(".!?"); punct != std::string_view::npos) {
    text = text.substr(0, punct + 1);
  }
  text = trim(text);
  if (text.empty()) return {std::nullopt, DropReason::kEmpty};
  return {std::string(text), std::nullopt};
}

void PrepStats::record_drop(DropReason reason) {
  switch (reason) {
    case DropReason::kForwarded:
      ++dropped_forwarded;
      break;
    case DropReason::kReuters:
      ++dropped_reuters;
      break;
    case DropReason::kEmpty:
      ++dropped_empty;
      break;
    case DropReason::kTooFewSentences:
      ++dropped_short;
      break;
    case DropReason::kInfrequentAuthor:
      ++dropped_infrequent;
      break;
  }
}

std::size_t PrepStats::dropped_total() const {
  return dropped_forwarded + dropped_reuters + dropped_empty + dropped_short + dropped_infrequent;
}

PrepStats& PrepStats::operator+=(const PrepStats& other) {
  input_count += other.input_count;
  dropped_forwarded += other.dropped_forwarded;
  dropped_reuters += other.dropped_reuters;
  dropped_empty += other.dropped_empty;
  dropped_short += other.dropped_short;
  dropped_infrequent += other.dropped_infrequent;
  output_count += other.output_count;
  return *this;
}

void to_json(json& j, const PrepStats& s) {
  j = json{{"input_count", s.input_count},
           {"dropped_forwarded", s.dropped_forwarded},
           {"dropped_reuters", s.dropped_reuters},
           {"dropped_empty", s.dropped_empty},
           {"dropped_short", s.dropped_short},
           {"dropped_infrequent", s.dropped_infrequent},
           {"output_count", s.output_count}};
}

void to_json(json& j, const DropRecord& record) {
  j = json{{"user", record.user}, {"reason", to_string(record.reason)}};
}

std::size_t nearest_rank_percentile(std::vector<std::size_t> values, double percentile) {
  if (values.empty()) throw DomainError("percentile of an empty list");
  if (!(percentile > 0.0 && percentile < 100.0)) throw DomainError("percentile must lie in (0, 100)");
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  // Slack keeps e.g. 80% of 10 at rank 8 despite rounding.
  auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

FrequentAuthors filter_frequent_authors(std::span<const AuthoredText> texts, double percentile) {
  if (texts.empty()) throw DomainError("no texts to filter");
  std::map<std::string, std::size_t> counts;
  for (const auto& t : texts) ++counts[t.user];
  std::vector<std::size_t> values;
  values.reserve(counts.size());
  for (const auto& [user, n] : counts) values.push_back(n);

  FrequentAuthors result;
  result.threshold = nearest_rank_percentile(std::move(values), percentile);
  for (const auto& [user, n] : counts) {
    if (n >= result.threshold) result.users.push_back(user);
  }
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (counts[texts[i].user] >= result.threshold) result.kept.push_back(i);
  }
  return result;
}

std::vector<Document> min_sentence_filter(std::span<const Document> documents, int minimum) {
  if (minimum < 1) throw DomainError("minimum sentence count must be at least 1");
  std::vector<Document> kept;
  for (const auto& doc : documents) {
    if (segment_sentences(doc.text).size() >= static_cast<std::size_t>(minimum)) kept.push_back(doc);
  }
  return kept;
}

std::vector<RawEmail> read_maildir(const std::string& root, std::string_view folder) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw DataError("maildir root '" + root + "' is not a directory");
  std::vector<RawEmail> emails;
  for (const auto& user_dir : fs::directory_iterator(root)) {
    if (!user_dir.is_directory()) continue;
    const fs::path box = user_dir.path() / std::string(folder);
    if (!fs::is_directory(box, ec)) continue;
    for (const auto& entry : fs::recursive_directory_iterator(box)) {
      if (!entry.is_regular_file()) continue;
      std::ifstream in(entry.path(), std::ios::binary);
      if (!in) throw DataError("cannot read " + entry.path().string());
      std::ostringstream buffer;
      buffer << in.rdbuf();
      std::string content = buffer.str();
      // Headers end at the first blank line.
      std::size_t body = std::string::npos;
      std::size_t skip = 0;
      if (const auto lf = content.find("\n\n"); lf != std::string::npos) body = lf, skip = 2;
      if (const auto crlf = content.find("\r\n\r\n"); crlf != std::string::npos && crlf < body) body = crlf, skip = 4;
      if (body != std::string::npos) content.erase(0, body + skip);
      emails.push_back(RawEmail{fs::relative(entry.path(), root).generic_string(),
                                user_dir.path().filename().string(), std::string(folder), std::move(content)});
    }
  }
  std::sort(emails.begin(), emails.end(), [](const RawEmail& a, const RawEmail& b) { return a.id < b.id; });
  return emails;
}

EnronPrepResult prepare_enron(std::span<const RawEmail> emails, const EnronPrepOptions& options) {
  if (options.min_sentences < 1) throw DomainError("minimum sentence count must be at least 1");
  EnronPrepResult result;
  result.stats.input_count = emails.size();
  const auto drop = [&result](const std::string& user, DropReason reason) {
    result.stats.record_drop(reason);
    result.drops.push_back({user, reason});
  };

  std::vector<Document> candidates;
  for (const auto& email : emails) {
    CleanResult cleaned = clean_enron_email(email, options.signoffs);
    if (!cleaned.text) {
      drop(email.user, *cleaned.dropped);
      continue;
    }
    if (segment_sentences(*cleaned.text).size() < static_cast<std::size_t>(options.min_sentences)) {
      drop(email.user, DropReason::kTooFewSentences);
      continue;
    }
    candidates.push_back(Document{email.id, std::move(*cleaned.text), std::nullopt, email.user});
  }

  if (!candidates.empty()) {
    std::vector<AuthoredText> authored;
    authored.reserve(candidates.size());
    for (const auto& d : candidates) authored.push_back({*d.privacy_label, d.text});
    const FrequentAuthors frequent = filter_frequent_authors(authored, options.percentile);
    result.threshold = frequent.threshold;
    result.users = frequent.users;
    std::vector<bool> keep(candidates.size(), false);
    for (std::size_t i : frequent.kept) keep[i] = true;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (keep[i]) {
        result.documents.push_back(std::move(candidates[i]));
      } else {
        drop(*candidates[i].privacy_label, DropReason::kInfrequentAuthor);
      }
    }
  }
  result.stats.output_count = result.documents.size();
  return result;
}

void from_json(const json& j, LabelRule& rule) {
  try {
    rule.field = j.at("field").get<std::string>();
    rule.first_of_list = j.value("first_of_list", true);
    rule.mapping = j.value("mapping", std::map<std::string, std::string>{});
    rule.strict = j.value("strict", false);
    if (j.contains("top_k") && !j.at("top_k").is_null()) rule.top_k = j.at("top_k").get<std::size_t>();
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad label rule: ") + e.what());
  }
}

void from_json(const json& j, LabelTaskSpec& spec) {
  static const std::set<std::string> kKeys = {"text_field", "id_field", "utility", "privacy", "sample_fraction", "seed"};
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.contains(key)) throw UsageError("unknown label task key '" + key + "'");
  }
  try {
    spec.text_field = j.value("text_field", std::string("text"));
    spec.id_field = j.value("id_field", std::string());
    if (j.contains("utility") && !j.at("utility").is_null()) spec.utility = j.at("utility").get<LabelRule>();
    if (j.contains("privacy") && !j.at("privacy").is_null()) spec.privacy = j.at("privacy").get<LabelRule>();
    if (j.contains("sample_fraction") && !j.at("sample_fraction").is_null()) {
      spec.sample_fraction = j.at("sample_fraction").get<double>();
    }
    spec.seed = j.value("seed", std::uint64_t{42});
  } catch (const json::exception& e) {
    throw UsageError(std::string("bad label task: ") + e.what());
  }
}

namespace {

std::string scalar_string(const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

struct RuleOutcome {
  std::optional<std::string> label;
  std::optional<std::string> offender;
};

RuleOutcome apply_rule(const json& record, std::size_t index, const LabelRule& rule) {
  if (!record.contains(rule.field)) {
    throw DataError("record " + std::to_string(index) + " has no field '" + rule.field + "'");
  }
  const json* value = &record.at(rule.field);
  if (value->is_array()) {
    if (!rule.first_of_list) throw DataError("record " + std::to_string(index) + ": list label not allowed");
    if (value->empty()) return {};
    value = &value->front();
  }
  if (value->is_null()) return {};
  std::string raw = scalar_string(*value);
  if (rule.mapping.empty()) return {std::move(raw), std::nullopt};
  if (const auto it = rule.mapping.find(raw); it != rule.mapping.end()) return {it->second, std::nullopt};
  if (rule.strict) return {std::nullopt, std::move(raw)};
  return {};
}

void restrict_top_k(std::vector<Document>& docs, std::optional<std::string> Document::*member, std::size_t k) {
  std::map<std::string, std::size_t> counts;
  for (const auto& d : docs) ++counts[*(d.*member)];
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::set<std::string> top;
  for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) top.insert(ranked[i].first);
  std::erase_if(docs, [&](const Document& d) { return !top.contains(*(d.*member)); });
}

}  // namespace

std::vector<Document> build_label_task(std::span<const json> records, const LabelTaskSpec& spec) {
  if (spec.sample_fraction && !(*spec.sample_fraction > 0.0 && *spec.sample_fraction <= 1.0)) {
    throw UsageError("sample_fraction must lie in (0, 1]");
  }
  std::vector<Document> docs;
  std::vector<std::string> offenders;
  std::set<std::string> seen_offenders;
  std::size_t offender_count = 0;

  for (std::size_t i = 0; i < records.size(); ++i) {
    const json& r = records[i];
    if (!r.is_object() || !r.contains(spec.text_field) || !r.at(spec.text_field).is_string()) {
      throw DataError("record " + std::to_string(i) + " has no text field '" + spec.text_field + "'");
    }
    Document doc;
    doc.text = r.at(spec.text_field).get<std::string>();
    if (spec.id_field.empty()) {
      doc.id = std::to_string(i);
    } else if (r.contains(spec.id_field)) {
      doc.id = scalar_string(r.at(spec.id_field));
    } else {
      throw DataError("record " + std::to_string(i) + " has no id field '" + spec.id_field + "'");
    }
    bool keep = !is_blank(doc.text);
    for (auto [rule, member] : {std::pair{&spec.utility, &Document::utility_label},
                                std::pair{&spec.privacy, &Document::privacy_label}}) {
      if (!*rule) continue;
      RuleOutcome outcome = apply_rule(r, i, **rule);
      if (outcome.offender) {
        ++offender_count;
        if (seen_offenders.insert(*outcome.offender).second && offenders.size() < 10) {
          offenders.push_back(*outcome.offender);
        }
      }
      if (!outcome.label) keep = false;
      doc.*member = std::move(outcome.label);
    }
    if (keep) docs.push_back(std::move(doc));
  }

  if (offender_count > 0) {
    std::string message = std::to_string(offender_count) + " record(s) with unmapped labels: ";
    for (std::size_t i = 0; i < offenders.size(); ++i) message += (i ? ", " : "") + offenders[i];
    throw DataError(message);
  }
  if (spec.utility && spec.utility->top_k) restrict_top_k(docs, &Document::utility_label, *spec.utility->top_k);
  if (spec.privacy && spec.privacy->top_k) restrict_top_k(docs, &Document::privacy_label, *spec.privacy->top_k);

  if (spec.sample_fraction && !docs.empty()) {
    const std::size_t n = docs.size();
    const auto take = static_cast<std::size_t>(std::floor(*spec.sample_fraction * static_cast<double>(n) + 1e-9));
    std::vector<std::size_t> order = seeded_permutation(n, spec.seed);
    order.resize(take);
    std::sort(order.begin(), order.end());
    std::vector<Document> sampled;
    sampled.reserve(take);
    for (std::size_t i : order) sampled.push_back(std::move(docs[i]));
    docs = std::move(sampled);
  }
  return docs;
}

}  // namespace privfill
