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

// Deterministic fixture-backed model for tests and CI runs.
//
// Fixture format (JSON):
//
//   {
//     "id": "stub-echo",                   // provider id, optional
//     "vocab": ["</s>", "S", "x", "y"],    // token strings; index = token id
//     "eos": "</s>",
//     "unk": "<unk>",                      // optional, appended if missing
//     "logit_high": 8, "logit_low": -95,   // used by "emit" rules, optional
//     "rules": [
//       {"pattern": "Paraphrase", "emit": ["x", "y"]},
//       {"pattern": ".*", "logits": [[...], [...]], "exhausted": "repeat"}
//     ]
//   }
//
// The first rule whose ECMAScript regex matches the prompt text drives the
// decode. An "emit" rule puts logit_high on the scripted token of each step
// (and on the end-of-sequence token after the script) and logit_low
// elsewhere. A "logits" rule replays one vector per step; once exhausted it
// either repeats the last vector ("repeat", default) or forces
// end-of-sequence ("eos"). Vectors shorter than the vocabulary are padded
// with logit_low. "[blank]" is always part of the vocabulary (appended after
// unk when missing).
// Tokenization splits on whitespace and maps unknown words to unk.

#ifndef PRIVFILL_STUB_MODEL_HPP_
#define PRIVFILL_STUB_MODEL_HPP_

#include <regex>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "privfill/model.hpp"

namespace privfill {

class StubModel : public GenerativeModel {
 public:
  static StubModel from_json(const nlohmann::json& fixture);
  static StubModel from_file(const std::string& path);

  std::string id() const override { return id_; }
  TokenSequence tokenize(std::string_view text) override;
  Eigen::VectorXd next_logits(const DecodingState& state) override;
  std::string decode(std::span<const TokenId> tokens) override;
  TokenId eos_token() const override { return eos_; }

  std::size_t vocab_size() const { return vocab_.size(); }
  TokenId token_id(std::string_view word) const;

 private:
  struct Rule {
    std::string pattern;
    std::regex regex;
    std::vector<TokenId> emit;
    std::vector<Eigen::VectorXd> logits;
    bool repeat_last = true;
    bool scripted = false;
  };

  StubModel() = default;
  Eigen::VectorXd one_hot(TokenId hot) const;

  std::string id_ = "stub";
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId eos_ = 0;
  TokenId unk_ = 0;
  double high_ = 8.0;
  double low_ = -95.0;
  std::vector<Rule> rules_;
};

}  // namespace privfill

#endif  // PRIVFILL_STUB_MODEL_HPP_
