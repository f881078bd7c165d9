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

#include "privfill/dp_mechanism.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "privfill/model.hpp"

namespace privfill {
namespace {

void require_positive(double value, const char* what) {
  if (!std::isfinite(value) || !(value > 0.0)) {
    throw DomainError(std::string(what) + " must be positive and finite, got " + std::to_string(value));
  }
}

}  // namespace

ClipBounds ClipBounds::make(double logit_min, double logit_max) {
  ClipBounds bounds{logit_min, logit_max};
  bounds.validate();
  return bounds;
}

void ClipBounds::validate() const {
  if (!std::isfinite(logit_min) || !std::isfinite(logit_max)) {
    throw DomainError("ClipBounds: bounds must be finite");
  }
  if (!(logit_min < logit_max)) {
    throw DomainError("ClipBounds: logit_min (" + std::to_string(logit_min) +
                      ") must be strictly below logit_max (" + std::to_string(logit_max) + ")");
  }
}

double temperature_from_epsilon(double epsilon, double sensitivity) {
  require_positive(epsilon, "epsilon");
  require_positive(sensitivity, "sensitivity");
  return 2.0 * sensitivity / epsilon;
}

double epsilon_from_temperature(double temperature, double sensitivity) {
  require_positive(temperature, "temperature");
  require_positive(sensitivity, "sensitivity");
  return 2.0 * sensitivity / temperature;
}

PrivacySpec PrivacySpec::from_epsilon(double epsilon_per_token, double sensitivity) {
  return PrivacySpec(epsilon_per_token, sensitivity, temperature_from_epsilon(epsilon_per_token, sensitivity));
}

PrivacySpec PrivacySpec::from_temperature(double temperature, double sensitivity) {
  // Epsilon is derived first and the temperature recomputed from it, so the
  // stored triple satisfies the conversion identity exactly.
  const double epsilon = epsilon_from_temperature(temperature, sensitivity);
  return from_epsilon(epsilon, sensitivity);
}

std::size_t sample_index(const Eigen::Ref<const Eigen::VectorXd>& probabilities, Rng& rng) {
  if (probabilities.size() == 0) throw DomainError("sample_index: empty distribution");
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (Eigen::Index i = 0; i < probabilities.size(); ++i) {
    const double p = probabilities[i];
    if (p <= 0.0) continue;
    last_positive = static_cast<std::size_t>(i);
    cumulative += p;
    if (u < cumulative) return static_cast<std::size_t>(i);
  }
  // Rounding left the cumulative sum just below u.
  return last_positive;
}

std::size_t sample_with_temperature(const Eigen::Ref<const Eigen::VectorXd>& scores,
                                    double temperature, Rng& rng) {
  const Eigen::VectorXd probabilities = selection_probabilities(scores, temperature);
  return sample_index(probabilities, rng);
}

Eigen::VectorXd dp_token_distribution(const Eigen::Ref<const Eigen::VectorXd>& logits,
                                      const ClipBounds& bounds, const PrivacySpec& spec) {
  if (logits.size() == 0) throw DomainError("dp_token_distribution: empty logit vector");
  return selection_probabilities(clip_normalize(logits, bounds), spec.temperature());
}

std::size_t dp_select_token(const Eigen::Ref<const Eigen::VectorXd>& logits,
                            const ClipBounds& bounds, const PrivacySpec& spec, Rng& rng) {
  if (logits.size() == 0) throw DomainError("dp_select_token: empty logit vector");
  const Eigen::VectorXd utilities = clip_normalize(logits, bounds);
  return sample_with_temperature(utilities, spec.temperature(), rng);
}

void to_json(nlohmann::json& j, const CalibrationReport& report) {
  j = nlohmann::json{{"logit_min", report.bounds.logit_min},
                     {"logit_max", report.bounds.logit_max},
                     {"sample_count", report.sample_count},
                     {"provider_id", report.provider_id}};
}

void from_json(const nlohmann::json& j, CalibrationReport& report) {
  report.bounds = ClipBounds::make(j.at("logit_min").get<double>(), j.at("logit_max").get<double>());
  report.sample_count = j.at("sample_count").get<std::size_t>();
  report.provider_id = j.at("provider_id").get<std::string>();
}

CalibrationReport calibrate_bounds(GenerativeModel& model, std::span<const std::string> sample_texts,
                                   const CalibrationOptions& options) {
  if (options.count < 1) throw DomainError("calibrate_bounds: count must be >= 1");
  if (options.max_new_tokens < 1) throw DomainError("calibrate_bounds: max_new_tokens must be >= 1");
  const std::size_t n = std::min(options.count, sample_texts.size());
  if (n == 0) throw DomainError("calibrate_bounds: no sample texts");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  const TokenId eos = model.eos_token();
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& text = sample_texts[i];
    const TokenSequence prompt = encode(model, text, options.max_len);
    TokenSequence generated;
    for (int step = 0; step < options.max_new_tokens; ++step) {
      const Eigen::VectorXd logits = model.next_logits({text, prompt, generated});
      if (logits.size() == 0) throw BackendError("calibrate_bounds: model returned no logits");
      if (!logits.allFinite()) throw DomainError("calibrate_bounds: model returned a non-finite logit");
      lo = std::min(lo, logits.minCoeff());
      hi = std::max(hi, logits.maxCoeff());
      Eigen::Index best = 0;
      logits.maxCoeff(&best);
      if (static_cast<TokenId>(best) == eos) break;
      generated.push_back(static_cast<TokenId>(best));
    }
  }
  if (!(lo < hi)) {
    throw DomainError("calibrate_bounds: degenerate logit range [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  }
  return CalibrationReport{ClipBounds{lo, hi}, n, model.id()};
}

void BudgetLedger::append(BudgetEntry entry) {
  require_positive(entry.epsilon_per_token, "epsilon_per_token");
  entries_.push_back(std::move(entry));
}

void BudgetLedger::merge(const BudgetLedger& other) {
  entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

double total_epsilon(const BudgetLedger& ledger) {
  double total = 0.0;
  for (const auto& entry : ledger.entries()) total += entry.epsilon();
  return total;
}

}  // namespace privfill
