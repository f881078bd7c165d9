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

#ifndef PRIVFILL_TESTS_TEST_MODELS_HPP_
#define PRIVFILL_TESTS_TEST_MODELS_HPP_

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "privfill/model.hpp"
#include "privfill/text.hpp"

namespace privfill::testing {

// Model whose next-token logits come from a callback. Input words that are
// not in the vocabulary map to the last vocabulary entry.
class LambdaModel : public GenerativeModel {
 public:
  using LogitFn = std::function<Eigen::VectorXd(const DecodingState&)>;

  LambdaModel(std::vector<std::string> vocab, TokenId eos, LogitFn fn)
      : vocab_(std::move(vocab)), eos_(eos), fn_(std::move(fn)) {}

  std::string id() const override { return "lambda"; }

  TokenSequence tokenize(std::string_view text) override {
    TokenSequence out;
    for (const auto& word : split_whitespace(text)) {
      TokenId id = static_cast<TokenId>(vocab_.size() - 1);
      for (std::size_t i = 0; i < vocab_.size(); ++i) {
        if (vocab_[i] == word) id = static_cast<TokenId>(i);
      }
      out.push_back(id);
    }
    return out;
  }

  Eigen::VectorXd next_logits(const DecodingState& state) override {
    ++calls;
    return fn_(state);
  }

  std::string decode(std::span<const TokenId> tokens) override {
    std::vector<std::string> words;
    for (TokenId t : tokens) {
      if (t != eos_) words.push_back(vocab_.at(static_cast<std::size_t>(t)));
    }
    return join(words, " ");
  }

  TokenId eos_token() const override { return eos_; }

  int calls = 0;

 private:
  std::vector<std::string> vocab_;
  TokenId eos_;
  LogitFn fn_;
};

// Logit vector with `high` at index `hot` and `low` elsewhere.
inline Eigen::VectorXd one_hot_logits(Eigen::Index size, Eigen::Index hot, double high = 8.0,
                                      double low = -95.0) {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(size, low);
  v[hot] = high;
  return v;
}

}  // namespace privfill::testing

#endif  // PRIVFILL_TESTS_TEST_MODELS_HPP_
