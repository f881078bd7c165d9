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

#include "privfill/model.hpp"

#include <algorithm>

#include "privfill/errors.hpp"

namespace privfill {

TokenSequence encode(GenerativeModel& model, std::string_view text, int max_len) {
  if (max_len < 1) throw DomainError("encode: max_len must be >= 1");
  TokenSequence tokens = model.tokenize(text);
  if (tokens.size() > static_cast<std::size_t>(max_len)) tokens.resize(static_cast<std::size_t>(max_len));
  return tokens;
}

TokenSequence encode_masked_prompt(GenerativeModel& model, std::string_view prompt, int max_len) {
  if (max_len < 1) throw DomainError("encode_masked_prompt: max_len must be >= 1");
  TokenSequence tokens = model.tokenize(prompt);
  const auto limit = static_cast<std::size_t>(max_len);
  if (tokens.size() <= limit) return tokens;

  const TokenSequence blank = model.tokenize(kBlankToken);
  const auto hit = blank.empty() ? tokens.end()
                                 : std::search(tokens.begin(), tokens.end(), blank.begin(), blank.end());
  if (hit == tokens.end() ||
      static_cast<std::size_t>(hit - tokens.begin()) + blank.size() <= limit) {
    tokens.resize(limit);
    return tokens;
  }

  const auto blank_begin = static_cast<std::size_t>(hit - tokens.begin());
  const std::size_t centre = blank_begin + blank.size() / 2;
  std::size_t start = centre > limit / 2 ? centre - limit / 2 : 0;
  start = std::min(start, tokens.size() - limit);
  return TokenSequence(tokens.begin() + static_cast<std::ptrdiff_t>(start),
                       tokens.begin() + static_cast<std::ptrdiff_t>(start + limit));
}

}  // namespace privfill
