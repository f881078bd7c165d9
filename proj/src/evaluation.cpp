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

#include "privfill/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "privfill/errors.hpp"
#include "privfill/logging.hpp"
#include "privfill/random.hpp"
#include "privfill/stemmer.hpp"
#include "privfill/text.hpp"

namespace privfill {

std::vector<std::string> rouge_tokenize(std::string_view text, bool stem) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    tokens.push_back(stem && current.size() > 3 ? porter_stem(current) : current);
    current.clear();
  };
  for (char raw : text) {
    const char c = (raw >= 'A' && raw <= 'Z') ? static_cast<char>(raw - 'A' + 'a') : raw;
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      current.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

namespace {

double f_measure(std::size_t overlap, std::size_t reference_size, std::size_t candidate_size) {
  if (overlap == 0 || reference_size == 0 || candidate_size == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / static_cast<double>(candidate_size);
  const double recall = static_cast<double>(overlap) / static_cast<double>(reference_size);
  return 2.0 * precision * recall / (precision + recall);
}

std::map<std::vector<std::string>, std::size_t> ngram_counts(std::span<const std::string> tokens, std::size_t n) {
  std::map<std::vector<std::string>, std::size_t> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++counts[{tokens.begin() + i, tokens.begin() + i + n}];
  return counts;
}

}  // namespace

double rouge_n_f(std::span<const std::string> reference, std::span<const std::string> candidate, int n) {
  if (n < 1) throw DomainError("ROUGE-N needs n >= 1");
  const auto order = static_cast<std::size_t>(n);
  const auto ref = ngram_counts(reference, order);
  const auto cand = ngram_counts(candidate, order);
  std::size_t overlap = 0;
  for (const auto& [gram, count] : cand) {
    if (const auto it = ref.find(gram); it != ref.end()) overlap += std::min(count, it->second);
  }
  const auto total = [](const auto& m) {
    std::size_t s = 0;
    for (const auto& [gram, count] : m) s += count;
    return s;
  };
  return f_measure(overlap, total(ref), total(cand));
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diagonal = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t above = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diagonal + 1 : std::max(row[j], row[j - 1]);
      diagonal = above;
    }
  }
  return row[b.size()];
}

double rouge_l_f(std::span<const std::string> reference, std::span<const std::string> candidate) {
  return f_measure(lcs_length(reference, candidate), reference.size(), candidate.size());
}

double rouge_n_f(std::string_view reference, std::string_view candidate, int n, bool stem) {
  return rouge_n_f(rouge_tokenize(reference, stem), rouge_tokenize(candidate, stem), n);
}

double rouge_l_f(std::string_view reference, std::string_view candidate, bool stem) {
  return rouge_l_f(rouge_tokenize(reference, stem), rouge_tokenize(candidate, stem));
}

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw DomainError("embedding sizes differ");
  if (!a.allFinite() || !b.allFinite()) throw DomainError("non-finite embedding");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw DomainError("zero embedding vector");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

double cosine_similarity(std::string_view original, std::string_view rewritten, EmbeddingProvider& embedder) {
  return cosine_similarity(embedder.embed(original), embedder.embed(rewritten));
}

PerplexityResult mean_perplexity(std::span<const std::string> texts, CausalScorer& scorer) {
  if (texts.empty()) throw DomainError("perplexity of an empty text list");
  PerplexityResult result;
  double sum = 0.0;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    try {
      const double ppl = scorer.perplexity(texts[i]);
      if (!std::isfinite(ppl) || ppl <= 0.0) throw BackendError("invalid perplexity " + std::to_string(ppl));
      sum += ppl;
      ++result.scored;
    } catch (const BackendError& e) {
      ++result.skipped;
      log_warning("perplexity skipped for text " + std::to_string(i) + ": " + e.what());
    }
  }
  if (result.scored == 0) throw BackendError("no text could be scored for perplexity");
  result.mean = sum / static_cast<double>(result.scored);
  return result;
}

namespace {

void check_aligned(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.size() != b.size()) {
    throw DataError("text lists differ in length (" + std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                    ")");
  }
  if (a.empty()) throw DomainError("no text pairs to evaluate");
}

bool is_zero(const Eigen::VectorXd& v) { return v.size() == 0 || v.isZero(0.0); }

}  // namespace

TextMetrics compute_text_metrics(std::span<const std::string> originals, std::span<const std::string> rewritten,
                                 EmbeddingProvider* embedder, CausalScorer* scorer) {
  check_aligned(originals, rewritten);
  TextMetrics m;
  double cos_sum = 0.0;
  std::size_t cos_n = 0;
  for (std::size_t i = 0; i < originals.size(); ++i) {
    const auto ref = rouge_tokenize(originals[i]);
    const auto cand = rouge_tokenize(rewritten[i]);
    m.rouge1 += rouge_n_f(ref, cand, 1);
    m.rougeL += rouge_l_f(ref, cand);
    if (embedder != nullptr) {
      const Eigen::VectorXd a = embedder->embed(originals[i]);
      const Eigen::VectorXd b = embedder->embed(rewritten[i]);
      if (is_zero(a) || is_zero(b)) {
        ++m.cosine_skipped;
      } else {
        cos_sum += cosine_similarity(a, b);
        ++cos_n;
      }
    }
  }
  const auto n = static_cast<double>(originals.size());
  m.rouge1 /= n;
  m.rougeL /= n;
  if (cos_n > 0) m.cosine_similarity = cos_sum / static_cast<double>(cos_n);
  if (scorer != nullptr) m.perplexity = mean_perplexity(rewritten, *scorer);
  return m;
}

std::vector<CosineBySentences> cosine_by_sentence_count(std::span<const std::string> originals,
                                                        std::span<const std::string> rewritten,
                                                        EmbeddingProvider& embedder) {
  check_aligned(originals, rewritten);
  std::map<std::size_t, std::pair<double, std::size_t>> groups;
  for (std::size_t i = 0; i < originals.size(); ++i) {
    const Eigen::VectorXd a = embedder.embed(originals[i]);
    const Eigen::VectorXd b = embedder.embed(rewritten[i]);
    if (is_zero(a) || is_zero(b)) continue;
    auto& g = groups[segment_sentences(originals[i]).size()];
    g.first += cosine_similarity(a, b);
    ++g.second;
  }
  std::vector<CosineBySentences> rows;
  for (const auto& [sentences, g] : groups) {
    rows.push_back({sentences, g.first / static_cast<double>(g.second), g.second});
  }
  return rows;
}

double micro_f1(std::span<const std::string> gold, std::span<const std::string> predicted) {
  if (gold.size() != predicted.size()) throw DomainError("gold and predicted labels differ in length");
  if (gold.empty()) throw DomainError("no labels to score");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) correct += gold[i] == predicted[i];
  return 100.0 * static_cast<double>(correct) / static_cast<double>(gold.size());
}

HoldoutSplit holdout_split(std::size_t n, std::uint64_t seed, double validation_fraction) {
  if (n < 2) throw DomainError("a holdout split needs at least two items");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw DomainError("validation fraction must lie in (0, 1)");
  }
  auto n_val = static_cast<std::size_t>(std::ceil(validation_fraction * static_cast<double>(n) - 1e-9));
  n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
  const std::vector<std::size_t> order = seeded_permutation(n, seed);
  HoldoutSplit split;
  split.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
  return split;
}

double majority_fraction(std::span<const std::string> labels, std::span<const std::size_t> indices) {
  if (indices.empty()) throw DomainError("majority fraction of an empty set");
  std::map<std::string, std::size_t> counts;
  std::size_t best = 0;
  for (std::size_t i : indices) best = std::max(best, ++counts[labels[i]]);
  return static_cast<double>(best) / static_cast<double>(indices.size());
}

namespace {

F1Summary summarize(std::vector<double> runs) {
  F1Summary s;
  for (double r : runs) s.mean += r;
  s.mean /= static_cast<double>(runs.size());
  for (double r : runs) s.std += (r - s.mean) * (r - s.mean);
  s.std = std::sqrt(s.std / static_cast<double>(runs.size()));
  s.runs = std::move(runs);
  return s;
}

// Train on (train_texts[i], labels[i]) for i in split.train, score on
// (eval_texts[i], labels[i]) for i in split.validation.
F1Summary train_and_score(const HoldoutSplit& split, std::span<const std::string> train_texts,
                          std::span<const std::string> eval_texts, std::span<const std::string> labels,
                          ClassifierTrainer& trainer, std::uint64_t seed, int repeats, std::string_view tag) {
  if (repeats < 1) throw DomainError("repeats must be at least 1");
  std::vector<std::string> gold;
  for (std::size_t i : split.validation) gold.push_back(labels[i]);

  std::vector<double> runs;
  for (int r = 0; r < repeats; ++r) {
    const std::string key = std::string(tag) + ":" + std::to_string(r);
    std::vector<std::size_t> order = split.train;
    Rng rng(derive_seed(seed, key));
    rng.shuffle(order);
    std::vector<std::string> texts;
    std::vector<std::string> train_labels;
    for (std::size_t i : order) {
      texts.push_back(train_texts[i]);
      train_labels.push_back(labels[i]);
    }
    std::unique_ptr<Predictor> predictor;
    {
      std::lock_guard<std::mutex> lock(training_resource());
      predictor = trainer.train(texts, train_labels, derive_seed(seed, key + ":train"));
    }
    std::vector<std::string> predicted;
    for (std::size_t i : split.validation) predicted.push_back(predictor->predict(eval_texts[i]));
    runs.push_back(micro_f1(gold, predicted));
  }
  F1Summary summary = summarize(std::move(runs));
  summary.validation_majority_fraction = majority_fraction(labels, split.validation);
  return summary;
}

}  // namespace

F1Summary run_utility_eval(std::span<const Document> dataset, ClassifierTrainer& trainer, std::uint64_t seed,
                           int repeats) {
  std::vector<std::string> texts;
  std::vector<std::string> labels;
  std::set<std::string> classes;
  for (const auto& doc : dataset) {
    if (!doc.utility_label) throw DataError("document '" + doc.id + "' has no utility label");
    texts.push_back(doc.text);
    labels.push_back(*doc.utility_label);
    classes.insert(*doc.utility_label);
  }
  if (classes.size() < 2) throw DomainError("utility evaluation needs at least two classes");
  const HoldoutSplit split = holdout_split(texts.size(), seed);
  return train_and_score(split, texts, texts, labels, trainer, seed, repeats, "utility");
}

std::string_view to_string(AttackProtocol protocol) {
  return protocol == AttackProtocol::kStatic ? "static" : "adaptive";
}

F1Summary run_privacy_attack(AttackProtocol protocol, std::span<const Document> originals,
                             std::span<const Document> rewritten, ClassifierTrainer& trainer, std::uint64_t seed,
                             std::optional<int> repeats) {
  if (originals.size() != rewritten.size()) {
    throw DataError("original and rewritten sets differ in size (" + std::to_string(originals.size()) + " vs " +
                    std::to_string(rewritten.size()) + ")");
  }
  std::vector<std::string> mismatched;
  for (std::size_t i = 0; i < originals.size(); ++i) {
    if (originals[i].id != rewritten[i].id && mismatched.size() < 10) mismatched.push_back(originals[i].id);
  }
  if (!mismatched.empty()) throw DataError("misaligned document ids: " + join(mismatched, ", "));

  std::vector<std::string> original_texts;
  std::vector<std::string> rewritten_texts;
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < originals.size(); ++i) {
    if (!originals[i].privacy_label) throw DataError("document '" + originals[i].id + "' has no privacy label");
    original_texts.push_back(originals[i].text);
    rewritten_texts.push_back(rewritten[i].text);
    labels.push_back(*originals[i].privacy_label);
  }
  const HoldoutSplit split = holdout_split(labels.size(), seed);
  const int runs = repeats.value_or(protocol == AttackProtocol::kStatic ? 1 : kDefaultRepeats);
  const auto& train_texts = protocol == AttackProtocol::kStatic ? original_texts : rewritten_texts;
  return train_and_score(split, train_texts, rewritten_texts, labels, trainer, seed, runs, "privacy");
}

double majority_f1(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("majority fraction must lie in (0, 1]");
  return 100.0 * 2.0 * p / (1.0 + p);
}

double relative_gain(const EvalInputs& in) {
  for (double v : {in.utility_original, in.utility_rewritten, in.privacy_original, in.privacy_rewritten,
                   in.utility_guess, in.privacy_guess}) {
    if (!(v >= 0.0 && v <= 100.0)) throw DomainError("F1 inputs must lie in [0, 100]");
  }
  const double du = in.utility_original - in.utility_guess;
  const double dp = in.privacy_original - in.privacy_guess;
  // F1 values are percentages; gaps this small are rounding noise.
  constexpr double kCollapse = 1e-9;
  if (std::abs(du) < kCollapse) throw DomainError("utility baseline collapsed: U_o equals MG_u");
  if (std::abs(dp) < kCollapse) throw DomainError("privacy baseline collapsed: P_o equals MG_p");
  return (in.utility_rewritten - in.utility_guess) / du - (in.privacy_rewritten - in.privacy_guess) / dp;
}

long pp_plus(double f1, double guess) { return std::lround((f1 - guess) * 100.0); }

}  // namespace privfill
