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

#ifndef PRIVFILL_MODEL_HPP_
#define PRIVFILL_MODEL_HPP_

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace privfill {

using TokenId = std::int32_t;
using TokenSequence = std::vector<TokenId>;

inline constexpr std::string_view kBlankToken = "[blank]";

// Everything a model sees when asked for the next-token distribution.
// prompt_text is the untruncated prompt string; prompt holds its (possibly
// truncated) encoding.
struct DecodingState {
  std::string_view prompt_text;
  std::span<const TokenId> prompt;
  std::span<const TokenId> generated;
};

// Generative model with its tokenizer. Implementations must return the same
// logits for the same state; all randomness lives in the sampler.
class GenerativeModel {
 public:
  virtual ~GenerativeModel() = default;

  virtual std::string id() const = 0;
  virtual TokenSequence tokenize(std::string_view text) = 0;
  virtual Eigen::VectorXd next_logits(const DecodingState& state) = 0;
  virtual std::string decode(std::span<const TokenId> tokens) = 0;
  virtual TokenId eos_token() const = 0;
};

// One model session per worker.
using ModelFactory = std::function<std::unique_ptr<GenerativeModel>()>;

// tokenize() truncated to the first max_len tokens.
TokenSequence encode(GenerativeModel& model, std::string_view text, int max_len);

// Encodes an infilling prompt. Overlong prompts are cut from the end unless
// that would drop the [blank] marker, in which case a max_len window centred
// on the marker is kept.
TokenSequence encode_masked_prompt(GenerativeModel& model, std::string_view prompt, int max_len);

}  // namespace privfill

#endif  // PRIVFILL_MODEL_HPP_
