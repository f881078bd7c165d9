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

#include "privfill/http_model.hpp"

#include <chrono>
#include <optional>
#include <thread>

#include "httplib.h"
#include "privfill/errors.hpp"

namespace privfill {

struct HttpModel::Impl {
  std::string endpoint;
  std::string base;
  std::string prefix;
  HttpModelOptions options;
  std::unique_ptr<httplib::Client> client;
  mutable std::optional<std::string> id;
  mutable std::optional<TokenId> eos;
};

HttpModel::HttpModel(std::string endpoint, HttpModelOptions options) : impl_(std::make_unique<Impl>()) {
  impl_->endpoint = endpoint;
  impl_->options = options;
  // Split "http://host:port/prefix" into scheme+authority and path prefix.
  const auto scheme = endpoint.find("://");
  const auto path_start = endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  impl_->base = path_start == std::string::npos ? endpoint : endpoint.substr(0, path_start);
  impl_->prefix = path_start == std::string::npos ? "" : endpoint.substr(path_start);
  while (!impl_->prefix.empty() && impl_->prefix.back() == '/') impl_->prefix.pop_back();
  impl_->client = std::make_unique<httplib::Client>(impl_->base);
  if (!impl_->client->is_valid()) throw BackendError("invalid model endpoint: " + endpoint);
  impl_->client->set_connection_timeout(options.timeout_seconds, 0);
  impl_->client->set_read_timeout(options.timeout_seconds, 0);
  impl_->client->set_write_timeout(options.timeout_seconds, 0);
}

HttpModel::~HttpModel() = default;

nlohmann::json HttpModel::call(const std::string& path, const nlohmann::json* body) const {
  const std::string url = impl_->prefix + path;
  std::string last_error = "no attempt made";
  const int attempts = std::max(1, impl_->options.attempts);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(impl_->options.retry_delay_ms));
    auto result = body == nullptr ? impl_->client->Get(url)
                                  : impl_->client->Post(url, body->dump(), "application/json");
    if (!result) {
      last_error = httplib::to_string(result.error());
      continue;
    }
    if (result->status >= 500) {
      last_error = "HTTP " + std::to_string(result->status);
      continue;
    }
    if (result->status != 200) {
      throw BackendError(impl_->endpoint + url + ": HTTP " + std::to_string(result->status) + " " + result->body);
    }
    try {
      return nlohmann::json::parse(result->body);
    } catch (const nlohmann::json::exception& e) {
      throw BackendError(impl_->endpoint + url + ": malformed response: " + e.what());
    }
  }
  throw BackendError(impl_->endpoint + url + ": giving up after " + std::to_string(attempts) +
                     " attempt(s): " + last_error);
}

void HttpModel::ensure_info() const {
  if (impl_->id && impl_->eos) return;
  const auto info = call("/info", nullptr);
  try {
    impl_->id = info.at("id").get<std::string>();
    impl_->eos = info.at("eos").get<TokenId>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("model /info: ") + e.what());
  }
}

std::string HttpModel::id() const {
  ensure_info();
  return *impl_->id;
}

TokenId HttpModel::eos_token() const {
  ensure_info();
  return *impl_->eos;
}

TokenSequence HttpModel::tokenize(std::string_view text) {
  const nlohmann::json body = {{"text", text}};
  try {
    return call("/tokenize", &body).at("tokens").get<TokenSequence>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("model /tokenize: ") + e.what());
  }
}

Eigen::VectorXd HttpModel::next_logits(const DecodingState& state) {
  const nlohmann::json body = {{"prompt_text", state.prompt_text},
                               {"prompt", TokenSequence(state.prompt.begin(), state.prompt.end())},
                               {"generated", TokenSequence(state.generated.begin(), state.generated.end())}};
  std::vector<double> values;
  try {
    values = call("/next_logits", &body).at("logits").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("model /next_logits: ") + e.what());
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string HttpModel::decode(std::span<const TokenId> tokens) {
  const nlohmann::json body = {{"tokens", TokenSequence(tokens.begin(), tokens.end())}};
  try {
    return call("/decode", &body).at("text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("model /decode: ") + e.what());
  }
}

}  // namespace privfill
