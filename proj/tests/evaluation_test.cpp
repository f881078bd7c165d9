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

#include <cmath>
#include <map>
#include <random>

#include "gtest/gtest.h"
#include "privfill/errors.hpp"
#include "privfill/logging.hpp"

namespace privfill {
namespace {

using Tokens = std::vector<std::string>;

// Multiset intersection by removing matched n-grams one at a time.
double brute_rouge_n(const Tokens& ref, const Tokens& cand, std::size_t n) {
  std::vector<Tokens> pool;
  for (std::size_t i = 0; i + n <= ref.size(); ++i) pool.emplace_back(ref.begin() + i, ref.begin() + i + n);
  const std::size_t ref_total = pool.size();
  std::size_t cand_total = 0;
  std::size_t overlap = 0;
  for (std::size_t i = 0; i + n <= cand.size(); ++i) {
    ++cand_total;
    const Tokens gram(cand.begin() + i, cand.begin() + i + n);
    const auto it = std::find(pool.begin(), pool.end(), gram);
    if (it != pool.end()) {
      ++overlap;
      pool.erase(it);
    }
  }
  if (overlap == 0) return 0.0;
  const double p = static_cast<double>(overlap) / static_cast<double>(cand_total);
  const double r = static_cast<double>(overlap) / static_cast<double>(ref_total);
  return 2 * p * r / (p + r);
}

bool is_subsequence(const Tokens& sub, const Tokens& seq) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < seq.size() && j < sub.size(); ++i) j += seq[i] == sub[j];
  return j == sub.size();
}

// Tries every subsequence of `a`.
std::size_t brute_lcs(const Tokens& a, const Tokens& b) {
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
    Tokens sub;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (mask & (1u << i)) sub.push_back(a[i]);
    }
    if (sub.size() > best && is_subsequence(sub, b)) best = sub.size();
  }
  return best;
}

double brute_rouge_l(const Tokens& ref, const Tokens& cand) {
  const std::size_t lcs = brute_lcs(ref, cand);
  if (lcs == 0) return 0.0;
  const double p = static_cast<double>(lcs) / static_cast<double>(cand.size());
  const double r = static_cast<double>(lcs) / static_cast<double>(ref.size());
  return 2 * p * r / (p + r);
}

TEST(RougeTest, HandCountedFixtures) {
  EXPECT_DOUBLE_EQ(rouge_n_f("the cat sat", "the cat ran"), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(rouge_l_f("the cat sat", "the cat ran"), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(rouge_l_f("alpha beta", "beta alpha"), 0.5);
  EXPECT_DOUBLE_EQ(rouge_n_f("A quiet evening.", "A quiet evening."), 1.0);
  EXPECT_DOUBLE_EQ(rouge_l_f("A quiet evening.", "A quiet evening."), 1.0);
  EXPECT_DOUBLE_EQ(rouge_n_f("red green", "blue yellow"), 0.0);
  EXPECT_DOUBLE_EQ(rouge_n_f("", ""), 0.0);
  EXPECT_DOUBLE_EQ(rouge_l_f("", "words"), 0.0);
}

TEST(RougeTest, StemmingAndTokenization) {
  EXPECT_EQ(rouge_tokenize("Running, CATS!"), (Tokens{"run", "cat"}));
  EXPECT_EQ(rouge_tokenize("Running, CATS!", false), (Tokens{"running", "cats"}));
  EXPECT_EQ(rouge_tokenize("it's 3pm"), (Tokens{"it", "s", "3pm"}));
  EXPECT_DOUBLE_EQ(rouge_n_f("running cats", "runs cat"), 1.0);
  EXPECT_LT(rouge_n_f("running cats", "runs cat", 1, false), 1.0);
}

TEST(RougeTest, BigramsAndErrors) {
  EXPECT_DOUBLE_EQ(rouge_n_f("a b c d", "a b x d", 2), brute_rouge_n({"a", "b", "c", "d"}, {"a", "b", "x", "d"}, 2));
  EXPECT_THROW(rouge_n_f("a", "a", 0), DomainError);
}

TEST(RougePropertyTest, MatchesBruteForceReferences) {
  std::mt19937 gen(101);
  const Tokens alphabet = {"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 100; ++trial) {
    Tokens ref(gen() % 11);
    Tokens cand(gen() % 11);
    for (auto& t : ref) t = alphabet[gen() % alphabet.size()];
    for (auto& t : cand) t = alphabet[gen() % alphabet.size()];
    EXPECT_EQ(rouge_n_f(ref, cand, 1), brute_rouge_n(ref, cand, 1));
    EXPECT_EQ(rouge_n_f(ref, cand, 2), brute_rouge_n(ref, cand, 2));
    EXPECT_EQ(lcs_length(ref, cand), brute_lcs(ref, cand));
    EXPECT_EQ(rouge_l_f(ref, cand), brute_rouge_l(ref, cand));
    const double r1 = rouge_n_f(ref, cand, 1);
    EXPECT_GE(r1, 0.0);
    EXPECT_LE(r1, 1.0);
  }
}

class TableEmbedder : public EmbeddingProvider {
 public:
  std::string id() const override { return "table"; }
  Eigen::VectorXd embed(std::string_view text) override { return vectors.at(std::string(text)); }
  std::map<std::string, Eigen::VectorXd> vectors;
};

TEST(CosineSimilarityTest, Geometry) {
  TableEmbedder e;
  e.vectors["x"] = Eigen::Vector2d(1.0, 0.0);
  e.vectors["y"] = Eigen::Vector2d(0.0, 3.0);
  e.vectors["d"] = Eigen::Vector2d(std::sqrt(2.0) / 2, std::sqrt(2.0) / 2);
  e.vectors["zero"] = Eigen::Vector2d(0.0, 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity("x", "x", e), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity("x", "y", e), 0.0);
  EXPECT_NEAR(cosine_similarity("x", "d", e), std::sqrt(2.0) / 2, 1e-15);
  EXPECT_THROW(cosine_similarity("x", "zero", e), DomainError);
}

TEST(CosineSimilarityTest, HashedEmbedderIsDeterministicAndUnitNorm) {
  HashedBowEmbedder e(64);
  const Eigen::VectorXd a = e.embed("The food was great.");
  EXPECT_NEAR(a.norm(), 1.0, 1e-12);
  EXPECT_TRUE(a.isApprox(HashedBowEmbedder(64).embed("The food was great.")));
  EXPECT_DOUBLE_EQ(cosine_similarity("Same text here.", "Same text here.", e), 1.0);
  EXPECT_TRUE(e.embed("").isZero());
  EXPECT_THROW(cosine_similarity("words", "", e), DomainError);
}

class ListScorer : public CausalScorer {
 public:
  explicit ListScorer(std::map<std::string, double> values) : values_(std::move(values)) {}
  std::string id() const override { return "list"; }
  double perplexity(std::string_view text) override {
    const auto it = values_.find(std::string(text));
    if (it == values_.end()) throw BackendError("too long");
    return it->second;
  }

 private:
  std::map<std::string, double> values_;
};

TEST(PerplexityTest, MeansAndSkips) {
  ListScorer scorer({{"a", 5.0}, {"b", 15.0}, {"c", 10.0}});
  const std::vector<std::string> all_ten = {"c", "c", "c"};
  EXPECT_DOUBLE_EQ(mean_perplexity(all_ten, scorer).mean, 10.0);
  const std::vector<std::string> pair = {"a", "b"};
  EXPECT_DOUBLE_EQ(mean_perplexity(pair, scorer).mean, 10.0);

  LogSink quiet = set_log_sink([](LogLevel, std::string_view) {});
  const std::vector<std::string> some_bad = {"a", "overlong", "b"};
  const PerplexityResult r = mean_perplexity(some_bad, scorer);
  EXPECT_DOUBLE_EQ(r.mean, 10.0);
  EXPECT_EQ(r.scored, 2u);
  EXPECT_EQ(r.skipped, 1u);
  const std::vector<std::string> all_bad = {"x"};
  EXPECT_THROW(mean_perplexity(all_bad, scorer), BackendError);
  set_log_sink(std::move(quiet));

  EXPECT_THROW(mean_perplexity(std::vector<std::string>{}, scorer), DomainError);
}

TEST(PerplexityTest, UnigramScorer) {
  const std::vector<std::string> corpus = {"a a b"};
  UnigramScorer scorer(corpus);
  // p(a) = 3/6, p(b) = 2/6 with V = 3 (a, b, unknown).
  EXPECT_NEAR(scorer.perplexity("a b"), std::exp(-(std::log(0.5) + std::log(2.0 / 6.0)) / 2.0), 1e-12);
  EXPECT_THROW(scorer.perplexity("!!"), BackendError);
}

// 15 positives, 5 negatives.
std::vector<Document> labeled_fixture() {
  std::vector<Document> docs;
  for (int i = 0; i < 20; ++i) {
    const std::string label = i % 4 == 3 ? "neg" : "pos";
    docs.push_back({"d" + std::to_string(i), "Review " + std::to_string(i) + " was " + label + ".", label,
                    i % 2 ? "F" : "M"});
  }
  return docs;
}

std::map<std::string, std::string> truth_of(const std::vector<Document>& docs, bool utility) {
  std::map<std::string, std::string> truth;
  for (const auto& d : docs) truth[d.text] = utility ? *d.utility_label : *d.privacy_label;
  return truth;
}

// Micro-F1 of a predictor that always outputs the training majority label.
double constant_predictor_f1(const std::vector<std::string>& labels, std::uint64_t seed) {
  const HoldoutSplit split = holdout_split(labels.size(), seed);
  std::map<std::string, int> counts;
  for (std::size_t i : split.train) ++counts[labels[i]];
  std::string majority;
  int best = -1;
  for (const auto& [label, n] : counts) {
    if (n > best) best = n, majority = label;
  }
  int hits = 0;
  for (std::size_t i : split.validation) hits += labels[i] == majority;
  return 100.0 * hits / static_cast<double>(split.validation.size());
}

TEST(HoldoutSplitTest, NinetyTen) {
  const HoldoutSplit s = holdout_split(20, 42);
  EXPECT_EQ(s.validation.size(), 2u);
  EXPECT_EQ(s.train.size(), 18u);
  const HoldoutSplit t = holdout_split(1730, 42);
  EXPECT_EQ(t.validation.size(), 173u);
  std::vector<std::size_t> all = s.train;
  all.insert(all.end(), s.validation.begin(), s.validation.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
  EXPECT_THROW(holdout_split(1, 42), DomainError);
}

TEST(UtilityEvalTest, OracleTrainerScoresPerfectly) {
  const auto docs = labeled_fixture();
  OracleTrainer oracle(truth_of(docs, true));
  const F1Summary s = run_utility_eval(docs, oracle, 42);
  EXPECT_DOUBLE_EQ(s.mean, 100.0);
  EXPECT_DOUBLE_EQ(s.std, 0.0);
  EXPECT_EQ(s.runs.size(), 3u);
}

TEST(UtilityEvalTest, ConstantPredictorMatchesEnumeration) {
  const auto docs = labeled_fixture();
  std::vector<std::string> labels;
  for (const auto& d : docs) labels.push_back(*d.utility_label);
  MajorityTrainer constant;
  for (std::uint64_t seed : {1u, 7u, 42u, 99u}) {
    const F1Summary s = run_utility_eval(docs, constant, seed);
    EXPECT_DOUBLE_EQ(s.mean, constant_predictor_f1(labels, seed)) << seed;
    EXPECT_DOUBLE_EQ(s.std, 0.0);
  }
}

TEST(UtilityEvalTest, DeterministicAndValidated) {
  const auto docs = labeled_fixture();
  NaiveBayesTrainer nb;
  const F1Summary a = run_utility_eval(docs, nb, 42);
  const F1Summary b = run_utility_eval(docs, nb, 42);
  EXPECT_EQ(a.runs, b.runs);
  EXPECT_EQ(a.std, b.std);

  std::vector<Document> single = docs;
  for (auto& d : single) d.utility_label = "pos";
  EXPECT_THROW(run_utility_eval(single, nb, 42), DomainError);
  single[0].utility_label.reset();
  EXPECT_THROW(run_utility_eval(single, nb, 42), DataError);
}

TEST(NaiveBayesTest, LearnsSeparableWords) {
  const std::vector<std::string> texts = {"great tasty food", "awful cold food", "great service", "awful wait"};
  const std::vector<std::string> labels = {"pos", "neg", "pos", "neg"};
  const auto predictor = NaiveBayesTrainer().train(texts, labels, 0);
  EXPECT_EQ(predictor->predict("great place"), "pos");
  EXPECT_EQ(predictor->predict("awful place"), "neg");
}

TEST(PrivacyAttackTest, IdentityRewritingWithOracle) {
  const auto docs = labeled_fixture();
  OracleTrainer oracle(truth_of(docs, false));
  const F1Summary st = run_privacy_attack(AttackProtocol::kStatic, docs, docs, oracle, 42);
  const F1Summary ad = run_privacy_attack(AttackProtocol::kAdaptive, docs, docs, oracle, 42);
  EXPECT_DOUBLE_EQ(st.mean, 100.0);
  EXPECT_DOUBLE_EQ(ad.mean, 100.0);
  EXPECT_EQ(st.runs.size(), 1u);
  EXPECT_EQ(ad.runs.size(), 3u);
}

TEST(PrivacyAttackTest, ConstantRewritingGivesMajorityGuess) {
  const auto docs = labeled_fixture();
  std::vector<Document> constant = docs;
  for (auto& d : constant) d.text = "x";
  std::vector<std::string> labels;
  for (const auto& d : docs) labels.push_back(*d.privacy_label);
  MajorityTrainer trainer;
  for (std::uint64_t seed : {3u, 42u}) {
    const F1Summary s = run_privacy_attack(AttackProtocol::kAdaptive, docs, constant, trainer, seed);
    EXPECT_DOUBLE_EQ(s.mean, constant_predictor_f1(labels, seed));
    EXPECT_EQ(run_privacy_attack(AttackProtocol::kAdaptive, docs, constant, trainer, seed).runs, s.runs);
  }
}

class RecordingTrainer : public ClassifierTrainer {
 public:
  std::string id() const override { return "recording"; }
  std::unique_ptr<Predictor> train(std::span<const std::string> texts, std::span<const std::string> labels,
                                   std::uint64_t seed) override {
    seen.emplace_back(texts.begin(), texts.end());
    return MajorityTrainer().train(texts, labels, seed);
  }
  std::vector<std::vector<std::string>> seen;
};

TEST(PrivacyAttackTest, ProtocolsShareSplitAndDifferInTrainingText) {
  const auto docs = labeled_fixture();
  std::vector<Document> rewritten = docs;
  for (auto& d : rewritten) d.text = "rewritten " + d.text;
  RecordingTrainer st;
  RecordingTrainer ad;
  run_privacy_attack(AttackProtocol::kStatic, docs, rewritten, st, 42);
  run_privacy_attack(AttackProtocol::kAdaptive, docs, rewritten, ad, 42, 1);
  ASSERT_EQ(st.seen.size(), 1u);
  ASSERT_EQ(ad.seen.size(), 1u);
  ASSERT_EQ(st.seen[0].size(), ad.seen[0].size());
  for (std::size_t i = 0; i < st.seen[0].size(); ++i) EXPECT_EQ("rewritten " + st.seen[0][i], ad.seen[0][i]);
}

TEST(PrivacyAttackTest, MisalignedInputs) {
  const auto docs = labeled_fixture();
  MajorityTrainer t;
  std::vector<Document> shuffled = docs;
  std::swap(shuffled[0], shuffled[1]);
  EXPECT_THROW(run_privacy_attack(AttackProtocol::kStatic, docs, shuffled, t, 42), DataError);
  const std::vector<Document> shorter(docs.begin(), docs.end() - 1);
  EXPECT_THROW(run_privacy_attack(AttackProtocol::kStatic, docs, shorter, t, 42), DataError);
}

TEST(MajorityF1Test, GuessingBaselines) {
  EXPECT_NEAR(majority_f1(1618.0 / 1730.0), 96.65, 0.01);
  EXPECT_NEAR(majority_f1(304.0 / 1730.0), 29.89, 0.01);
  EXPECT_NEAR(majority_f1(2713.0 / 2949.0), 95.83, 0.01);
  EXPECT_NEAR(majority_f1(0.5), 66.67, 0.01);
  EXPECT_DOUBLE_EQ(majority_f1(1.0), 100.0);
  EXPECT_THROW(majority_f1(0.0), DomainError);
  EXPECT_THROW(majority_f1(1.01), DomainError);
}

TEST(MajorityF1Test, StrictlyIncreasing) {
  double previous = 0.0;
  for (int i = 1; i <= 1000; ++i) {
    const double v = majority_f1(i / 1000.0);
    EXPECT_GT(v, previous);
    previous = v;
  }
}

TEST(RelativeGainTest, TableValues) {
  EXPECT_NEAR(relative_gain({99.57, 98.16, 72.46, 59.47, 95.83, 66.67}), 1.87, 0.01);
  EXPECT_NEAR(relative_gain({99.57, 98.63, 72.46, 60.16, 95.83, 66.67}), 1.87, 0.01);
  EXPECT_NEAR(relative_gain({95.03, 93.49, 96.30, 19.44, 96.65, 29.89}), 2.11, 0.01);
}

TEST(RelativeGainTest, Limits) {
  EXPECT_DOUBLE_EQ(relative_gain({90, 90, 80, 80, 50, 50}), 0.0);
  EXPECT_DOUBLE_EQ(relative_gain({90, 90, 80, 50, 50, 50}), 1.0);
  try {
    relative_gain({50, 60, 80, 70, 50, 40});
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("utility"), std::string::npos);
  }
  EXPECT_THROW(relative_gain({90, 60, 40, 70, 50, 40}), DomainError);
  EXPECT_THROW(relative_gain({101, 60, 80, 70, 50, 40}), DomainError);
}

TEST(RelativeGainTest, NearEqualBaselineCountsAsCollapsed) {
  const double p_o = 100.0 / 3.0 * 1.5;  // differs from 50 only in the last bits
  EXPECT_THROW(relative_gain({90, 60, p_o, 30, 50, 50}), DomainError);
}

TEST(RelativeGainPropertyTest, AffineInvarianceOfUtilityTerm) {
  std::mt19937 gen(8);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int trial = 0; trial < 500; ++trial) {
    EvalInputs in{u(gen), u(gen), u(gen), u(gen), u(gen), u(gen)};
    if (std::abs(in.utility_original - in.utility_guess) < 1.0) continue;
    if (std::abs(in.privacy_original - in.privacy_guess) < 1.0) continue;
    const double base = relative_gain(in);
    // Rescale U values and MG_u with the same affine map, staying in range.
    const double a = 0.5;
    const double b = 10.0;
    EvalInputs scaled = in;
    scaled.utility_original = a * in.utility_original + b;
    scaled.utility_rewritten = a * in.utility_rewritten + b;
    scaled.utility_guess = a * in.utility_guess + b;
    EXPECT_NEAR(relative_gain(scaled), base, 1e-9);
  }
}

TEST(PpPlusTest, Arithmetic) {
  EXPECT_EQ(pp_plus(95.83, 95.83), 0);
  EXPECT_EQ(pp_plus(99.57, 95.83), 374);
  EXPECT_EQ(pp_plus(93.59, 95.83), -224);
}

TEST(TextMetricsTest, IdentityRewriting) {
  const std::vector<std::string> texts = {"The food was great. Staff were kind.", "Shipping took two weeks."};
  HashedBowEmbedder embedder;
  UnigramScorer scorer(texts);
  const TextMetrics m = compute_text_metrics(texts, texts, &embedder, &scorer);
  EXPECT_DOUBLE_EQ(m.rouge1, 1.0);
  EXPECT_DOUBLE_EQ(m.rougeL, 1.0);
  ASSERT_TRUE(m.cosine_similarity.has_value());
  EXPECT_NEAR(*m.cosine_similarity, 1.0, 1e-12);
  ASSERT_TRUE(m.perplexity.has_value());
  EXPECT_GT(m.perplexity->mean, 0.0);

  const std::vector<std::string> one = {"x"};
  EXPECT_THROW(compute_text_metrics(texts, one, nullptr, nullptr), DataError);
}

TEST(TextMetricsTest, CosineBySentenceCount) {
  const std::vector<std::string> originals = {"One. Two.", "One. Two.", "Single sentence.", "A. B. C."};
  const std::vector<std::string> rewritten = {"One. Two.", "Other words.", "Single sentence.", ""};
  HashedBowEmbedder embedder;
  const auto rows = cosine_by_sentence_count(originals, rewritten, embedder);
  ASSERT_EQ(rows.size(), 2u);  // the empty rewrite is skipped
  EXPECT_EQ(rows[0].sentence_count, 1u);
  EXPECT_NEAR(rows[0].mean_cosine, 1.0, 1e-12);
  EXPECT_EQ(rows[1].sentence_count, 2u);
  EXPECT_EQ(rows[1].documents, 2u);
  EXPECT_LT(rows[1].mean_cosine, 1.0);
}

}  // namespace
}  // namespace privfill
