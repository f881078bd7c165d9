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

// Evaluation providers: text classifiers, sentence embedders and causal
// perplexity scorers, plus small deterministic implementations that run
// without model weights.

#ifndef PRIVFILL_PROVIDERS_HPP_
#define PRIVFILL_PROVIDERS_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace privfill {

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::string predict(std::string_view text) const = 0;
};

// Trains one classifier for a single epoch. Implementations must be
// deterministic given the seed.
class ClassifierTrainer {
 public:
  virtual ~ClassifierTrainer() = default;
  virtual std::string id() const = 0;
  virtual std::unique_ptr<Predictor> train(std::span<const std::string> texts, std::span<const std::string> labels,
                                           std::uint64_t seed) = 0;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string id() const = 0;
  virtual Eigen::VectorXd embed(std::string_view text) = 0;
};

class CausalScorer {
 public:
  virtual ~CausalScorer() = default;
  virtual std::string id() const = 0;
  // Throws BackendError when the text cannot be scored.
  virtual double perplexity(std::string_view text) = 0;
};

// Serializes classifier training; one accelerator, one job.
std::mutex& training_resource();

// Knows the true label of every text it may be asked about.
class OracleTrainer : public ClassifierTrainer {
 public:
  explicit OracleTrainer(std::map<std::string, std::string> truth) : truth_(std::move(truth)) {}
  std::string id() const override { return "oracle"; }
  std::unique_ptr<Predictor> train(std::span<const std::string> texts, std::span<const std::string> labels,
                                   std::uint64_t seed) override;

 private:
  std::map<std::string, std::string> truth_;
};

// Always predicts the most frequent training label (ties: smallest label).
class MajorityTrainer : public ClassifierTrainer {
 public:
  std::string id() const override { return "majority"; }
  std::unique_ptr<Predictor> train(std::span<const std::string> texts, std::span<const std::string> labels,
                                   std::uint64_t seed) override;
};

// Multinomial naive Bayes over ROUGE-style tokens with add-one smoothing.
class NaiveBayesTrainer : public ClassifierTrainer {
 public:
  std::string id() const override { return "naive-bayes"; }
  std::unique_ptr<Predictor> train(std::span<const std::string> texts, std::span<const std::string> labels,
                                   std::uint64_t seed) override;
};

// Signed feature hashing of stemmed tokens, L2-normalized.
class HashedBowEmbedder : public EmbeddingProvider {
 public:
  explicit HashedBowEmbedder(int dimension = 256);
  std::string id() const override { return "hashed-bow:" + std::to_string(dimension_); }
  Eigen::VectorXd embed(std::string_view text) override;

 private:
  int dimension_;
};

// Add-one smoothed unigram model fitted on a reference corpus.
class UnigramScorer : public CausalScorer {
 public:
  explicit UnigramScorer(std::span<const std::string> corpus);
  std::string id() const override { return "unigram"; }
  double perplexity(std::string_view text) override;

 private:
  std::map<std::string, double> counts_;
  double total_ = 0.0;
};

// Builds a trainer from an identifier: "naive-bayes" or "majority".
std::unique_ptr<ClassifierTrainer> make_trainer(std::string_view id);
// "hashed-bow" or "hashed-bow:<dimension>".
std::unique_ptr<EmbeddingProvider> make_embedder(std::string_view id);

}  // namespace privfill

#endif  // PRIVFILL_PROVIDERS_HPP_
