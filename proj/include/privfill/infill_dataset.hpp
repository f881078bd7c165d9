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

// Training data for sentence infillers.
//
// A sample is an input text holding exactly one [blank] plus the sentence
// that was masked out. Encyclopedia-style samples keep a window of two
// sentences either side of the target; crawl-style samples keep the whole
// document.

#ifndef PRIVFILL_INFILL_DATASET_HPP_
#define PRIVFILL_INFILL_DATASET_HPP_

#include <cstdint>
#include <functional>
#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "privfill/random.hpp"

namespace privfill {

enum class SampleSource { kWikiStyle, kCrawlStyle };

std::string_view to_string(SampleSource source);
SampleSource parse_sample_source(std::string_view name);

struct InfillSample {
  std::string input_text;
  std::string target_text;
  SampleSource source = SampleSource::kWikiStyle;

  bool operator==(const InfillSample&) const = default;
};

// {"input": ..., "target": ..., "source": ...}
void to_json(nlohmann::json& j, const InfillSample& sample);
void from_json(const nlohmann::json& j, InfillSample& sample);

inline constexpr std::size_t kWikiContextSentences = 2;

// Explicit-target builders. Sentences are joined with single spaces.
// Throw DomainError on an empty list, an out-of-range index, or a sentence
// that already contains [blank].
InfillSample build_wiki_sample_at(std::span<const std::string> sentences, std::size_t target);
InfillSample build_crawl_sample_at(std::span<const std::string> sentences, std::size_t target);

// The target index is drawn uniformly with rng.below(n).
InfillSample build_wiki_sample(std::span<const std::string> sentences, Rng& rng);
InfillSample build_crawl_sample(std::span<const std::string> sentences, Rng& rng);

// Drops heading lines ("== History =="), list bullets and table/template
// markup before segmentation.
std::string strip_wiki_markup(std::string_view text);

// Streams documents from `in`, calling `sink` once per document.
// "jsonl": one JSON object per line, the document in `field`.
// "text":  documents separated by blank lines.
// Malformed JSON lines throw DataError with the line number.
void read_corpus(std::istream& in, std::string_view format, std::string_view field,
                 const std::function<void(std::string_view)>& sink);

// One sample per document with at least one sentence. Document i draws
// its target from document_rng(seed, std::to_string(i)), so shards built
// with the same seed and offsets agree.
std::vector<InfillSample> build_samples(std::span<const std::string> documents, SampleSource source,
                                        std::uint64_t seed, std::size_t first_index = 0);

struct SampleSplit {
  std::vector<InfillSample> train;
  std::vector<InfillSample> validation;
};

// Seeded shuffle, then |train| = floor(train_fraction * N).
SampleSplit merge_and_split(std::span<const InfillSample> samples, double train_fraction = 0.99,
                            std::uint64_t seed = 42);

// Fine-tuning manifest. `overrides` is a JSON object whose keys must be
// among the defaults; values are type- and range-checked. The result holds
// every parameter plus a "provenance" object marking each one "default" or
// "override". Throws UsageError on unknown keys or invalid values.
nlohmann::json emit_training_manifest(const nlohmann::json& overrides = nlohmann::json::object());

nlohmann::json default_training_parameters();

}  // namespace privfill

#endif  // PRIVFILL_INFILL_DATASET_HPP_
