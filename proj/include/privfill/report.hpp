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

// Evaluation reports and their plain-text / CSV renderings.

#ifndef PRIVFILL_REPORT_HPP_
#define PRIVFILL_REPORT_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "privfill/evaluation.hpp"

namespace privfill {

inline constexpr int kReportSchemaVersion = 1;

// All F1 values are percentages. Missing values serialize as null.
struct EvalReport {
  int schema_version = kReportSchemaVersion;
  std::string dataset;
  std::string mechanism;
  std::string kind;  // utility, privacy, metrics or merged
  std::uint64_t seed = 42;
  std::string f1_averaging = "micro";
  std::map<std::string, std::string> providers;
  std::optional<std::size_t> documents;

  std::optional<double> utility_f1_mean;
  std::optional<double> utility_f1_std;
  std::optional<double> utility_f1_baseline;  // U_o
  std::optional<double> mg_utility;           // MG_u

  std::optional<double> privacy_f1_static;
  std::optional<double> privacy_f1_adaptive_mean;
  std::optional<double> privacy_f1_adaptive_std;
  std::optional<double> privacy_f1_baseline;  // P_o
  std::optional<double> mg_privacy;           // MG_p

  std::optional<double> rouge1;
  std::optional<double> rougeL;
  std::optional<double> cosine_similarity;
  std::optional<std::size_t> cosine_skipped;
  std::optional<double> perplexity_mean;
  std::optional<std::size_t> perplexity_skipped;

  // Derived by finalize_report.
  std::optional<long> pp_plus;
  std::optional<double> relative_gain_static;
  std::optional<double> relative_gain_adaptive;
};

void to_json(nlohmann::json& j, const EvalReport& report);
// Throws DataError on a schema-version mismatch or out-of-range metrics.
void from_json(const nlohmann::json& j, EvalReport& report);

// Fills pp_plus and the relative gains from the fields they depend on.
// Anything whose inputs are missing (or whose baseline collapsed) stays empty.
void finalize_report(EvalReport& report);

// Field-wise union of two reports for the same dataset and mechanism.
// Throws DataError when both carry different values for a field.
EvalReport merge_reports(const EvalReport& a, const EvalReport& b);

// Groups by (dataset, mechanism) in first-seen order, merges and finalizes.
std::vector<EvalReport> combine_reports(std::span<const EvalReport> reports);

// Dataset | Mechanism | R1 | RL | CS | PPL | F1
std::string render_metrics_table(std::span<const EvalReport> rows);
// Dataset | Mechanism | Utility F1 | PP+ | Static F1 | RG static | Adaptive F1 | RG adaptive
std::string render_privacy_table(std::span<const EvalReport> rows);
// One line per row with every numeric field; empty cells for missing values.
std::string render_csv(std::span<const EvalReport> rows);

// sentence_count,mean_cosine,documents
std::string render_cosine_csv(std::span<const CosineBySentences> rows);

}  // namespace privfill

#endif  // PRIVFILL_REPORT_HPP_
