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

// Client for a model served over HTTP with a JSON protocol:
//
//   GET  /info         -> {"id": string, "eos": int}
//   POST /tokenize     {"text"}                            -> {"tokens": [int]}
//   POST /next_logits  {"prompt_text", "prompt", "generated"} -> {"logits": [number]}
//   POST /decode       {"tokens": [int]}                   -> {"text": string}
//
// Connection failures and 5xx responses are retried; anything else, or
// running out of attempts, raises BackendError.

#ifndef PRIVFILL_HTTP_MODEL_HPP_
#define PRIVFILL_HTTP_MODEL_HPP_

#include <memory>
#include <string>

#include "json.hpp"
#include "privfill/model.hpp"

namespace privfill {

struct HttpModelOptions {
  int attempts = 3;
  int retry_delay_ms = 200;
  int timeout_seconds = 60;
};

class HttpModel : public GenerativeModel {
 public:
  // endpoint: "http://host:port" (an optional path prefix is kept).
  explicit HttpModel(std::string endpoint, HttpModelOptions options = {});
  ~HttpModel() override;

  std::string id() const override;
  TokenSequence tokenize(std::string_view text) override;
  Eigen::VectorXd next_logits(const DecodingState& state) override;
  std::string decode(std::span<const TokenId> tokens) override;
  TokenId eos_token() const override;

 private:
  nlohmann::json call(const std::string& path, const nlohmann::json* body) const;
  void ensure_info() const;

  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace privfill

#endif  // PRIVFILL_HTTP_MODEL_HPP_
