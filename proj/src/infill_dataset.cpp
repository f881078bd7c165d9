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

#include "privfill/infill_dataset.hpp"

#include <algorithm>
#include <cmath>

#include "privfill/errors.hpp"
#include "privfill/model.hpp"
#include "privfill/text.hpp"

namespace privfill {

using nlohmann::json;

std::string_view to_string(SampleSource source) {
  return source == SampleSource::kWikiStyle ? "wiki_style" : "crawl_style";
}

SampleSource parse_sample_source(std::string_view name) {
  if (name == "wiki_style") return SampleSource::kWikiStyle;
  if (name == "crawl_style") return SampleSource::kCrawlStyle;
  throw DataError("unknown sample source '" + std::string(name) + "'");
}

void to_json(json& j, const InfillSample& sample) {
  j = json{{"input", sample.input_text}, {"target", sample.target_text}, {"source", to_string(sample.source)}};
}

void from_json(const json& j, InfillSample& sample) {
  try {
    sample.input_text = j.at("input").get<std::string>();
    sample.target_text = j.at("target").get<std::string>();
    sample.source = parse_sample_source(j.at("source").get<std::string>());
  } catch (const json::exception& e) {
    throw DataError(std::string("bad infill sample: ") + e.what());
  }
  if (count_occurrences(sample.input_text, kBlankToken) != 1) {
    throw DataError("infill sample input must contain [blank] exactly once");
  }
}

namespace {

void check_sentences(std::span<const std::string> sentences, std::size_t target) {
  if (sentences.empty()) throw DomainError("infill sample needs at least one sentence");
  if (target >= sentences.size()) {
    throw DomainError("target index " + std::to_string(target) + " out of range for " +
                      std::to_string(sentences.size()) + " sentences");
  }
  for (const auto& s : sentences) {
    if (s.find(kBlankToken) != std::string::npos) throw DomainError("sentence already contains [blank]");
  }
}

InfillSample masked_window(std::span<const std::string> sentences, std::size_t first, std::size_t last,
                           std::size_t target, SampleSource source) {
  std::vector<std::string> parts;
  parts.reserve(last - first);
  for (std::size_t i = first; i < last; ++i) {
    parts.push_back(i == target ? std::string(kBlankToken) : sentences[i]);
  }
  return InfillSample{join(parts, " "), sentences[target], source};
}

}  // namespace

InfillSample build_wiki_sample_at(std::span<const std::string> sentences, std::size_t target) {
  check_sentences(sentences, target);
  const std::size_t first = target >= kWikiContextSentences ? target - kWikiContextSentences : 0;
  const std::size_t last = std::min(sentences.size(), target + kWikiContextSentences + 1);
  return masked_window(sentences, first, last, target, SampleSource::kWikiStyle);
}

InfillSample build_crawl_sample_at(std::span<const std::string> sentences, std::size_t target) {
  check_sentences(sentences, target);
  return masked_window(sentences, 0, sentences.size(), target, SampleSource::kCrawlStyle);
}

InfillSample build_wiki_sample(std::span<const std::string> sentences, Rng& rng) {
  if (sentences.empty()) throw DomainError("infill sample needs at least one sentence");
  return build_wiki_sample_at(sentences, static_cast<std::size_t>(rng.below(sentences.size())));
}

InfillSample build_crawl_sample(std::span<const std::string> sentences, Rng& rng) {
  if (sentences.empty()) throw DomainError("infill sample needs at least one sentence");
  return build_crawl_sample_at(sentences, static_cast<std::size_t>(rng.below(sentences.size())));
}

namespace {

bool is_markup_line(std::string_view line) {
  if (line.empty()) return false;
  if (line.front() == '=' && line.back() == '=') return true;
  switch (line.front()) {
    case '*':
    case '#':
    case ':':
    case ';':
    case '|':
    case '!':
      return true;
    default:
      break;
  }
  return line.starts_with("{|") || line.starts_with("{{") || line.starts_with("}}");
}

// [[target|label]] -> label, [[target]] -> target.
std::string unwrap_links(std::string_view line) {
  std::string out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const std::size_t open = line.find("[[", pos);
    if (open == std::string_view::npos) break;
    const std::size_t close = line.find("]]", open + 2);
    if (close == std::string_view::npos) break;
    out.append(line.substr(pos, open - pos));
    std::string_view inner = line.substr(open + 2, close - open - 2);
    if (const auto bar = inner.rfind('|'); bar != std::string_view::npos) inner = inner.substr(bar + 1);
    out.append(inner);
    pos = close + 2;
  }
  out.append(line.substr(pos));
  return replace_all(replace_all(out, "'''", ""), "''", "");
}

}  // namespace

std::string strip_wiki_markup(std::string_view text) {
  std::string out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    if (!is_markup_line(line)) {
      if (line.empty()) {
        if (!out.empty() && !out.ends_with("\n\n")) out += "\n\n";
      } else {
        if (!out.empty() && !out.ends_with('\n')) out += ' ';
        out += unwrap_links(line);
      }
    } else if (!out.empty() && !out.ends_with("\n\n")) {
      out += "\n\n";  // markup breaks a paragraph
    }
    pos = end + 1;
  }
  return std::string(trim(out));
}

void read_corpus(std::istream& in, std::string_view format, std::string_view field,
                 const std::function<void(std::string_view)>& sink) {
  std::string line;
  if (format == "jsonl") {
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (is_blank(line)) continue;
      json record;
      try {
        record = json::parse(line);
        sink(record.at(std::string(field)).get<std::string>());
      } catch (const json::exception& e) {
        throw DataError("corpus line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  } else if (format == "text") {
    std::string document;
    while (std::getline(in, line)) {
      if (is_blank(line)) {
        if (!document.empty()) sink(document);
        document.clear();
      } else {
        if (!document.empty()) document += '\n';
        document += line;
      }
    }
    if (!document.empty()) sink(document);
  } else {
    throw UsageError("unknown corpus format '" + std::string(format) + "'");
  }
}

std::vector<InfillSample> build_samples(std::span<const std::string> documents, SampleSource source,
                                        std::uint64_t seed, std::size_t first_index) {
  std::vector<InfillSample> samples;
  samples.reserve(documents.size());
  for (std::size_t i = 0; i < documents.size(); ++i) {
    const std::string text =
        source == SampleSource::kWikiStyle ? strip_wiki_markup(documents[i]) : documents[i];
    std::vector<std::string> sentences = split_sentences(text);
    std::erase_if(sentences, [](const std::string& s) { return s.find(kBlankToken) != std::string::npos; });
    if (sentences.empty()) continue;
    Rng rng = document_rng(seed, std::to_string(first_index + i));
    samples.push_back(source == SampleSource::kWikiStyle ? build_wiki_sample(sentences, rng)
                                                         : build_crawl_sample(sentences, rng));
  }
  return samples;
}

SampleSplit merge_and_split(std::span<const InfillSample> samples, double train_fraction, std::uint64_t seed) {
  if (samples.empty()) throw DomainError("cannot split an empty sample set");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw DomainError("train_fraction must lie in (0, 1)");
  }
  const std::size_t n = samples.size();
  // The small slack absorbs binary rounding, e.g. 0.29 * 100.
  const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 1e-9));
  const std::vector<std::size_t> order = seeded_permutation(n, seed);
  SampleSplit split;
  split.train.reserve(n_train);
  split.validation.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? split.train : split.validation).push_back(samples[order[i]]);
  }
  return split;
}

json default_training_parameters() {
  return json{{"epochs", 1},         {"learning_rate", 5e-5}, {"eval_metric", "rouge"},
              {"max_length_tokens", 512}, {"train_batch", 32},  {"eval_batch", 64}};
}

namespace {

void check_override(const std::string& key, const json& value) {
  const auto bad = [&key](const std::string& why) { throw UsageError("manifest override '" + key + "' " + why); };
  if (key == "learning_rate") {
    if (!value.is_number()) bad("must be a number");
    const double lr = value.get<double>();
    if (!std::isfinite(lr) || lr <= 0.0) bad("must be positive");
  } else if (key == "eval_metric") {
    if (!value.is_string() || value.get<std::string>().empty()) bad("must be a non-empty string");
  } else {
    if (!value.is_number_integer()) bad("must be an integer");
    if (value.get<long long>() <= 0) bad("must be positive");
  }
}

}  // namespace

json emit_training_manifest(const json& overrides) {
  if (!overrides.is_object()) throw UsageError("manifest overrides must be a JSON object");
  json manifest = default_training_parameters();
  json provenance = json::object();
  for (const auto& [key, value] : manifest.items()) provenance[key] = "default";
  for (const auto& [key, value] : overrides.items()) {
    if (!manifest.contains(key)) throw UsageError("unknown manifest key '" + key + "'");
    check_override(key, value);
    manifest[key] = value;
    provenance[key] = "override";
  }
  manifest["provenance"] = std::move(provenance);
  return manifest;
}

}  // namespace privfill
