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

// Clipped-logit temperature sampling as an exponential mechanism over the
// vocabulary, epsilon <-> temperature conversion, clipping-bound calibration
// and sequential-composition budget accounting.
//
// With logits clipped to [logit_min, logit_max] and rescaled to [0, 1] the
// utility of every token has sensitivity 1. Sampling token t with
// probability proportional to exp(u_t / T) is then the exponential
// mechanism at epsilon = 2 * sensitivity / T, spent once per generated
// token.

#ifndef PRIVFILL_DP_MECHANISM_HPP_
#define PRIVFILL_DP_MECHANISM_HPP_

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "privfill/errors.hpp"
#include "privfill/random.hpp"

namespace privfill {

class GenerativeModel;

struct ClipBounds {
  double logit_min = -95.0;
  double logit_max = 8.0;

  // Throws DomainError unless both are finite and logit_min < logit_max.
  static ClipBounds make(double logit_min, double logit_max);
  void validate() const;

  double range() const { return logit_max - logit_min; }
};

// Bounds measured for flan-t5-large decoding 100 C4 texts; the shipped default.
inline constexpr ClipBounds kReferenceClipBounds{-95.0, 8.0};

double temperature_from_epsilon(double epsilon, double sensitivity);
double epsilon_from_temperature(double temperature, double sensitivity);

// Per-token privacy parameters. temperature is always derived from the other
// two so that temperature == 2 * sensitivity / epsilon_per_token holds.
class PrivacySpec {
 public:
  static PrivacySpec from_epsilon(double epsilon_per_token, double sensitivity = 1.0);
  static PrivacySpec from_temperature(double temperature, double sensitivity = 1.0);

  double epsilon_per_token() const { return epsilon_; }
  double sensitivity() const { return sensitivity_; }
  double temperature() const { return temperature_; }

 private:
  PrivacySpec(double epsilon, double sensitivity, double temperature)
      : epsilon_(epsilon), sensitivity_(sensitivity), temperature_(temperature) {}

  double epsilon_;
  double sensitivity_;
  double temperature_;
};

// (clamp(x, min, max) - min) / (max - min), elementwise.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> clip_normalize(
    const Eigen::MatrixBase<Derived>& logits, const ClipBounds& bounds) {
  using Scalar = typename Derived::Scalar;
  bounds.validate();
  if (!logits.allFinite()) throw DomainError("clip_normalize: non-finite logit");
  const auto lo = static_cast<Scalar>(bounds.logit_min);
  const auto hi = static_cast<Scalar>(bounds.logit_max);
  return ((logits.derived().array().max(lo).min(hi) - lo) / (hi - lo)).matrix();
}

// softmax(scores / temperature), computed with the maximum subtracted before
// exponentiation so that small temperatures do not overflow.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> selection_probabilities(
    const Eigen::MatrixBase<Derived>& scores, typename Derived::Scalar temperature) {
  using Scalar = typename Derived::Scalar;
  if (scores.size() == 0) throw DomainError("selection_probabilities: empty score vector");
  if (!(temperature > Scalar(0)) || !std::isfinite(temperature)) {
    throw DomainError("selection_probabilities: temperature must be positive and finite");
  }
  const auto scaled = (scores.derived().array() / temperature).eval();
  const Scalar peak = scaled.maxCoeff();
  const auto weights = (scaled - peak).exp().eval();
  return (weights / weights.sum()).matrix();
}

// Inverse-CDF draw over the full distribution (no top-k/top-p truncation).
std::size_t sample_index(const Eigen::Ref<const Eigen::VectorXd>& probabilities, Rng& rng);

// Shared sampler used by every mechanism: draws from softmax(scores / T).
std::size_t sample_with_temperature(const Eigen::Ref<const Eigen::VectorXd>& scores,
                                    double temperature, Rng& rng);

// Closed-form output distribution of dp_select_token.
Eigen::VectorXd dp_token_distribution(const Eigen::Ref<const Eigen::VectorXd>& logits,
                                      const ClipBounds& bounds, const PrivacySpec& spec);

// Exponential-mechanism token selection on raw next-token logits.
std::size_t dp_select_token(const Eigen::Ref<const Eigen::VectorXd>& logits,
                            const ClipBounds& bounds, const PrivacySpec& spec, Rng& rng);

struct CalibrationOptions {
  std::size_t count = 100;
  int max_len = 512;
  int max_new_tokens = 32;
};

struct CalibrationReport {
  ClipBounds bounds;
  std::size_t sample_count = 0;
  std::string provider_id;
};

void to_json(nlohmann::json& j, const CalibrationReport& report);
void from_json(const nlohmann::json& j, CalibrationReport& report);

// Greedily decodes the first min(count, texts.size()) texts and records the
// range of every logit observed along the way.
CalibrationReport calibrate_bounds(GenerativeModel& model, std::span<const std::string> sample_texts,
                                   const CalibrationOptions& options = {});

struct BudgetEntry {
  std::string document_id;
  std::size_t sentence_index = 0;
  std::size_t tokens_generated = 0;
  double epsilon_per_token = 0.0;

  double epsilon() const { return static_cast<double>(tokens_generated) * epsilon_per_token; }
};

// Append-only record of per-sentence spending. Not synchronized: each
// worker owns its ledger and ledgers are merged in a fixed order.
class BudgetLedger {
 public:
  void append(BudgetEntry entry);
  void merge(const BudgetLedger& other);

  const std::vector<BudgetEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

 private:
  std::vector<BudgetEntry> entries_;
};

// Sum of tokens_generated * epsilon_per_token over all entries.
double total_epsilon(const BudgetLedger& ledger);

}  // namespace privfill

#endif  // PRIVFILL_DP_MECHANISM_HPP_
