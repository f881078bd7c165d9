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

#include "privfill/providers.hpp"

#include <charconv>
#include <cmath>
#include <unordered_map>

#include "privfill/errors.hpp"
#include "privfill/evaluation.hpp"
#include "privfill/random.hpp"

namespace privfill {

std::mutex& training_resource() {
  static std::mutex resource;
  return resource;
}

namespace {

void check_training_data(std::span<const std::string> texts, std::span<const std::string> labels) {
  if (texts.size() != labels.size()) throw DomainError("texts and labels differ in length");
  if (texts.empty()) throw DomainError("empty training set");
}

class OraclePredictor : public Predictor {
 public:
  explicit OraclePredictor(std::map<std::string, std::string> truth) : truth_(std::move(truth)) {}
  std::string predict(std::string_view text) const override {
    const auto it = truth_.find(std::string(text));
    return it == truth_.end() ? std::string() : it->second;
  }

 private:
  std::map<std::string, std::string> truth_;
};

class ConstantPredictor : public Predictor {
 public:
  explicit ConstantPredictor(std::string label) : label_(std::move(label)) {}
  std::string predict(std::string_view) const override { return label_; }

 private:
  std::string label_;
};

class NaiveBayesPredictor : public Predictor {
 public:
  NaiveBayesPredictor(std::vector<std::string> classes, std::unordered_map<std::string, Eigen::Index> vocab,
                      Eigen::VectorXd log_prior, Eigen::MatrixXd log_likelihood)
      : classes_(std::move(classes)),
        vocab_(std::move(vocab)),
        log_prior_(std::move(log_prior)),
        log_likelihood_(std::move(log_likelihood)) {}

  std::string predict(std::string_view text) const override {
    Eigen::VectorXd score = log_prior_;
    for (const auto& token : rouge_tokenize(text)) {
      if (const auto it = vocab_.find(token); it != vocab_.end()) score += log_likelihood_.col(it->second);
    }
    Eigen::Index best = 0;
    score.maxCoeff(&best);  // first maximum, so ties go to the smallest label
    return classes_[static_cast<std::size_t>(best)];
  }

 private:
  std::vector<std::string> classes_;
  std::unordered_map<std::string, Eigen::Index> vocab_;
  Eigen::VectorXd log_prior_;
  Eigen::MatrixXd log_likelihood_;  // classes x vocabulary
};

}  // namespace

std::unique_ptr<Predictor> OracleTrainer::train(std::span<const std::string> texts,
                                                std::span<const std::string> labels, std::uint64_t) {
  check_training_data(texts, labels);
  return std::make_unique<OraclePredictor>(truth_);
}

std::unique_ptr<Predictor> MajorityTrainer::train(std::span<const std::string> texts,
                                                  std::span<const std::string> labels, std::uint64_t) {
  check_training_data(texts, labels);
  std::map<std::string, std::size_t> counts;
  for (const auto& l : labels) ++counts[l];
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  return std::make_unique<ConstantPredictor>(best->first);
}

std::unique_ptr<Predictor> NaiveBayesTrainer::train(std::span<const std::string> texts,
                                                    std::span<const std::string> labels, std::uint64_t) {
  check_training_data(texts, labels);
  std::map<std::string, Eigen::Index> class_index;
  for (const auto& l : labels) class_index.emplace(l, 0);
  std::vector<std::string> classes;
  for (auto& [label, index] : class_index) {
    index = static_cast<Eigen::Index>(classes.size());
    classes.push_back(label);
  }

  std::vector<std::vector<std::string>> tokenized;
  tokenized.reserve(texts.size());
  std::unordered_map<std::string, Eigen::Index> vocab;
  for (const auto& text : texts) {
    tokenized.push_back(rouge_tokenize(text));
    for (const auto& t : tokenized.back()) vocab.emplace(t, static_cast<Eigen::Index>(vocab.size()));
  }

  const auto n_classes = static_cast<Eigen::Index>(classes.size());
  const auto n_vocab = static_cast<Eigen::Index>(vocab.size());
  Eigen::MatrixXd counts = Eigen::MatrixXd::Ones(n_classes, std::max<Eigen::Index>(n_vocab, 1));
  Eigen::VectorXd docs = Eigen::VectorXd::Zero(n_classes);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const Eigen::Index c = class_index.at(labels[i]);
    docs[c] += 1.0;
    for (const auto& t : tokenized[i]) counts(c, vocab.at(t)) += 1.0;
  }
  const Eigen::VectorXd row_totals = counts.rowwise().sum();
  Eigen::MatrixXd log_likelihood = (counts.array().colwise() / row_totals.array()).log().matrix();
  Eigen::VectorXd log_prior = (docs.array() / static_cast<double>(texts.size())).log().matrix();
  return std::make_unique<NaiveBayesPredictor>(std::move(classes), std::move(vocab), std::move(log_prior),
                                               std::move(log_likelihood));
}

HashedBowEmbedder::HashedBowEmbedder(int dimension) : dimension_(dimension) {
  if (dimension <= 0) throw DomainError("embedding dimension must be positive");
}

Eigen::VectorXd HashedBowEmbedder::embed(std::string_view text) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dimension_);
  for (const auto& token : rouge_tokenize(text)) {
    const std::uint64_t h = fnv1a64(token);
    v[static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dimension_))] += (h >> 63) ? -1.0 : 1.0;
  }
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

UnigramScorer::UnigramScorer(std::span<const std::string> corpus) {
  for (const auto& text : corpus) {
    for (auto& token : rouge_tokenize(text, false)) {
      counts_[std::move(token)] += 1.0;
      total_ += 1.0;
    }
  }
}

double UnigramScorer::perplexity(std::string_view text) {
  const auto tokens = rouge_tokenize(text, false);
  if (tokens.empty()) throw BackendError("cannot score a text without tokens");
  const double vocab = static_cast<double>(counts_.size()) + 1.0;  // + unknown
  double log_prob = 0.0;
  for (const auto& t : tokens) {
    const auto it = counts_.find(t);
    const double c = it == counts_.end() ? 0.0 : it->second;
    log_prob += std::log((c + 1.0) / (total_ + vocab));
  }
  return std::exp(-log_prob / static_cast<double>(tokens.size()));
}

std::unique_ptr<ClassifierTrainer> make_trainer(std::string_view id) {
  if (id == "naive-bayes") return std::make_unique<NaiveBayesTrainer>();
  if (id == "majority") return std::make_unique<MajorityTrainer>();
  throw UsageError("unknown trainer '" + std::string(id) + "'");
}

std::unique_ptr<EmbeddingProvider> make_embedder(std::string_view id) {
  constexpr std::string_view kPrefix = "hashed-bow";
  if (!id.starts_with(kPrefix)) throw UsageError("unknown embedder '" + std::string(id) + "'");
  std::string_view rest = id.substr(kPrefix.size());
  if (rest.empty()) return std::make_unique<HashedBowEmbedder>();
  int dimension = 0;
  if (rest.front() != ':' ||
      std::from_chars(rest.data() + 1, rest.data() + rest.size(), dimension).ptr != rest.data() + rest.size() ||
      dimension <= 0) {
    throw UsageError("bad embedder '" + std::string(id) + "'");
  }
  return std::make_unique<HashedBowEmbedder>(dimension);
}

}  // namespace privfill
