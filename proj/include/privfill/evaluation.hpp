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

// Utility and empirical-privacy evaluation.
//
// Text metrics (ROUGE-1/L, embedding cosine similarity, perplexity),
// classifier-based utility F1, static and adaptive attribute-inference
// attacks, and the baseline-adjusted summary scores.

#ifndef PRIVFILL_EVALUATION_HPP_
#define PRIVFILL_EVALUATION_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "privfill/providers.hpp"
#include "privfill/rewriter.hpp"

namespace privfill {

// Lower-cases, maps every non [a-z0-9] byte to a space, splits, and stems
// tokens longer than three characters.
std::vector<std::string> rouge_tokenize(std::string_view text, bool stem = true);

// F-measures on token sequences. An empty side gives 0.
double rouge_n_f(std::span<const std::string> reference, std::span<const std::string> candidate, int n);
double rouge_l_f(std::span<const std::string> reference, std::span<const std::string> candidate);

double rouge_n_f(std::string_view reference, std::string_view candidate, int n = 1, bool stem = true);
double rouge_l_f(std::string_view reference, std::string_view candidate, bool stem = true);

// Length of the longest common subsequence.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

// Dot product of the unit-normalized vectors, clamped to [-1, 1].
// Throws DomainError on a zero, non-finite or mismatched vector.
double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
double cosine_similarity(std::string_view original, std::string_view rewritten, EmbeddingProvider& embedder);

struct PerplexityResult {
  double mean = 0.0;
  std::size_t scored = 0;
  std::size_t skipped = 0;
};

// Texts the scorer rejects are skipped and counted. Throws DomainError on an
// empty list and BackendError when no text could be scored.
PerplexityResult mean_perplexity(std::span<const std::string> texts, CausalScorer& scorer);

struct TextMetrics {
  double rouge1 = 0.0;
  double rougeL = 0.0;
  std::optional<double> cosine_similarity;
  std::size_t cosine_skipped = 0;
  std::optional<PerplexityResult> perplexity;
};

// Means over aligned pairs. Pairs whose embedding is zero are skipped for
// cosine similarity.
TextMetrics compute_text_metrics(std::span<const std::string> originals, std::span<const std::string> rewritten,
                                 EmbeddingProvider* embedder, CausalScorer* scorer);

struct CosineBySentences {
  std::size_t sentence_count = 0;
  double mean_cosine = 0.0;
  std::size_t documents = 0;
};

// Mean cosine similarity grouped by the original's sentence count.
std::vector<CosineBySentences> cosine_by_sentence_count(std::span<const std::string> originals,
                                                        std::span<const std::string> rewritten,
                                                        EmbeddingProvider& embedder);

// Accuracy in percent; equal to micro-F1 for single-label predictions.
double micro_f1(std::span<const std::string> gold, std::span<const std::string> predicted);

struct HoldoutSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

// Seeded shuffle; the first ceil(validation_fraction * n) indices validate.
HoldoutSplit holdout_split(std::size_t n, std::uint64_t seed, double validation_fraction = 0.1);

// Share of the most frequent label among `indices`.
double majority_fraction(std::span<const std::string> labels, std::span<const std::size_t> indices);

struct F1Summary {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over runs
  std::vector<double> runs;
  double validation_majority_fraction = 0.0;
};

inline constexpr int kDefaultRepeats = 3;

// Trains `repeats` classifiers on differently shuffled copies of one fixed
// 90/10 split of the utility labels and scores each on the validation part.
// Throws DataError when a label is missing, DomainError with fewer than two
// classes.
F1Summary run_utility_eval(std::span<const Document> dataset, ClassifierTrainer& trainer, std::uint64_t seed,
                           int repeats = kDefaultRepeats);

enum class AttackProtocol { kStatic, kAdaptive };

std::string_view to_string(AttackProtocol protocol);

// Attribute inference on privacy labels taken from `originals`.
//   static:   train on original texts, evaluate on rewritten texts;
//   adaptive: train and evaluate on rewritten texts.
// The split depends only on the seed and corpus size, so both protocols see
// the same indices. Static runs once unless `repeats` is given; adaptive
// runs kDefaultRepeats times. Throws DataError on misaligned ids.
F1Summary run_privacy_attack(AttackProtocol protocol, std::span<const Document> originals,
                             std::span<const Document> rewritten, ClassifierTrainer& trainer, std::uint64_t seed,
                             std::optional<int> repeats = std::nullopt);

// F1 of the majority class under a constant majority predictor, in percent:
// 100 * 2p / (1 + p). Throws DomainError unless 0 < p <= 1.
double majority_f1(double majority_fraction);

struct EvalInputs {
  double utility_original;    // U_o
  double utility_rewritten;   // U_r
  double privacy_original;    // P_o
  double privacy_rewritten;   // P_r
  double utility_guess;       // MG_u
  double privacy_guess;       // MG_p
};

// (U_r - MG_u) / (U_o - MG_u) - (P_r - MG_p) / (P_o - MG_p).
// Throws DomainError on values outside [0, 100] or a collapsed baseline.
double relative_gain(const EvalInputs& inputs);

// Signed distance from the guessing baseline in hundredths of a point.
long pp_plus(double f1, double guess);

}  // namespace privfill

#endif  // PRIVFILL_EVALUATION_HPP_
