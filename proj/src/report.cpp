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

#include "privfill/report.hpp"

#include <algorithm>
#include <cstdio>

#include "privfill/errors.hpp"

namespace privfill {

using nlohmann::json;

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
void read_opt(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) {
    out = j.at(key).get<T>();
  } else {
    out.reset();
  }
}

void check_range(const std::optional<double>& v, double lo, double hi, const char* name) {
  if (v && !(*v >= lo && *v <= hi)) throw DataError(std::string("report field ") + name + " out of range");
}

}  // namespace

void to_json(json& j, const EvalReport& r) {
  j = json{{"schema_version", r.schema_version},
           {"dataset", r.dataset},
           {"mechanism", r.mechanism},
           {"kind", r.kind},
           {"seed", r.seed},
           {"f1_averaging", r.f1_averaging},
           {"providers", r.providers},
           {"documents", opt(r.documents)},
           {"utility_f1_mean", opt(r.utility_f1_mean)},
           {"utility_f1_std", opt(r.utility_f1_std)},
           {"utility_f1_baseline", opt(r.utility_f1_baseline)},
           {"mg_utility", opt(r.mg_utility)},
           {"privacy_f1_static", opt(r.privacy_f1_static)},
           {"privacy_f1_adaptive_mean", opt(r.privacy_f1_adaptive_mean)},
           {"privacy_f1_adaptive_std", opt(r.privacy_f1_adaptive_std)},
           {"privacy_f1_baseline", opt(r.privacy_f1_baseline)},
           {"mg_privacy", opt(r.mg_privacy)},
           {"rouge1", opt(r.rouge1)},
           {"rougeL", opt(r.rougeL)},
           {"cosine_similarity", opt(r.cosine_similarity)},
           {"cosine_skipped", opt(r.cosine_skipped)},
           {"perplexity_mean", opt(r.perplexity_mean)},
           {"perplexity_skipped", opt(r.perplexity_skipped)},
           {"pp_plus", opt(r.pp_plus)},
           {"relative_gain_static", opt(r.relative_gain_static)},
           {"relative_gain_adaptive", opt(r.relative_gain_adaptive)}};
}

void from_json(const json& j, EvalReport& r) {
  try {
    r.schema_version = j.at("schema_version").get<int>();
  } catch (const json::exception&) {
    throw DataError("report has no schema_version");
  }
  if (r.schema_version != kReportSchemaVersion) {
    throw DataError("report schema_version " + std::to_string(r.schema_version) + " is not supported (expected " +
                    std::to_string(kReportSchemaVersion) + ")");
  }
  try {
    r.dataset = j.value("dataset", std::string());
    r.mechanism = j.value("mechanism", std::string());
    r.kind = j.value("kind", std::string());
    r.seed = j.value("seed", std::uint64_t{42});
    r.f1_averaging = j.value("f1_averaging", std::string("micro"));
    r.providers = j.value("providers", std::map<std::string, std::string>{});
    read_opt(j, "documents", r.documents);
    read_opt(j, "utility_f1_mean", r.utility_f1_mean);
    read_opt(j, "utility_f1_std", r.utility_f1_std);
    read_opt(j, "utility_f1_baseline", r.utility_f1_baseline);
    read_opt(j, "mg_utility", r.mg_utility);
    read_opt(j, "privacy_f1_static", r.privacy_f1_static);
    read_opt(j, "privacy_f1_adaptive_mean", r.privacy_f1_adaptive_mean);
    read_opt(j, "privacy_f1_adaptive_std", r.privacy_f1_adaptive_std);
    read_opt(j, "privacy_f1_baseline", r.privacy_f1_baseline);
    read_opt(j, "mg_privacy", r.mg_privacy);
    read_opt(j, "rouge1", r.rouge1);
    read_opt(j, "rougeL", r.rougeL);
    read_opt(j, "cosine_similarity", r.cosine_similarity);
    read_opt(j, "cosine_skipped", r.cosine_skipped);
    read_opt(j, "perplexity_mean", r.perplexity_mean);
    read_opt(j, "perplexity_skipped", r.perplexity_skipped);
    read_opt(j, "pp_plus", r.pp_plus);
    read_opt(j, "relative_gain_static", r.relative_gain_static);
    read_opt(j, "relative_gain_adaptive", r.relative_gain_adaptive);
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
  check_range(r.rouge1, 0.0, 1.0, "rouge1");
  check_range(r.rougeL, 0.0, 1.0, "rougeL");
  check_range(r.cosine_similarity, -1.0, 1.0, "cosine_similarity");
  if (r.perplexity_mean && !(*r.perplexity_mean > 0.0)) throw DataError("report field perplexity_mean must be > 0");
}

void finalize_report(EvalReport& r) {
  r.pp_plus.reset();
  r.relative_gain_static.reset();
  r.relative_gain_adaptive.reset();
  if (r.utility_f1_mean && r.mg_utility) r.pp_plus = pp_plus(*r.utility_f1_mean, *r.mg_utility);
  if (!(r.utility_f1_baseline && r.utility_f1_mean && r.mg_utility && r.privacy_f1_baseline && r.mg_privacy)) return;
  const auto gain = [&r](double privacy_rewritten) -> std::optional<double> {
    try {
      return relative_gain({*r.utility_f1_baseline, *r.utility_f1_mean, *r.privacy_f1_baseline, privacy_rewritten,
                            *r.mg_utility, *r.mg_privacy});
    } catch (const DomainError&) {
      return std::nullopt;
    }
  };
  if (r.privacy_f1_static) r.relative_gain_static = gain(*r.privacy_f1_static);
  if (r.privacy_f1_adaptive_mean) r.relative_gain_adaptive = gain(*r.privacy_f1_adaptive_mean);
}

EvalReport merge_reports(const EvalReport& a, const EvalReport& b) {
  if (a.dataset != b.dataset || a.mechanism != b.mechanism) {
    throw DataError("cannot merge reports for different datasets or mechanisms");
  }
  json merged = a;
  const json other = b;
  for (const auto& [key, value] : other.items()) {
    if (key == "kind" || key == "pp_plus" || key.starts_with("relative_gain")) continue;
    json& slot = merged[key];
    if (key == "providers") {
      for (const auto& [name, id] : value.items()) {
        if (slot.contains(name) && slot.at(name) != id) throw DataError("conflicting provider '" + name + "'");
        slot[name] = id;
      }
    } else if (slot.is_null()) {
      slot = value;
    } else if (!value.is_null() && slot != value) {
      throw DataError("conflicting values for report field '" + key + "' (" + a.dataset + "/" + a.mechanism + ")");
    }
  }
  merged["kind"] = "merged";
  EvalReport out = merged.get<EvalReport>();
  finalize_report(out);
  return out;
}

std::vector<EvalReport> combine_reports(std::span<const EvalReport> reports) {
  std::vector<EvalReport> rows;
  for (const auto& r : reports) {
    auto it = std::find_if(rows.begin(), rows.end(), [&r](const EvalReport& x) {
      return x.dataset == r.dataset && x.mechanism == r.mechanism;
    });
    if (it == rows.end()) {
      rows.push_back(r);
      finalize_report(rows.back());
    } else {
      *it = merge_reports(*it, r);
    }
  }
  return rows;
}

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string cell(const std::optional<double>& v, int digits) { return v ? fixed(*v, digits) : "n/a"; }

std::string cell_with_std(const std::optional<double>& mean, const std::optional<double>& sd) {
  if (!mean) return "n/a";
  return sd ? fixed(*mean, 2) + " (" + fixed(*sd, 2) + ")" : fixed(*mean, 2);
}

// First two columns left-aligned, the rest right-aligned.
std::string render_grid(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
  }
  const auto line = [&width](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string pad(width[c] - cells[c].size(), ' ');
      if (c > 0) out += "  ";
      out += c < 2 ? cells[c] + pad : pad + cells[c];
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string out = line(header);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
  for (const auto& row : rows) out += line(row);
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  return "\"" + [&s] {
    std::string e;
    for (char c : s) e += c == '"' ? std::string("\"\"") : std::string(1, c);
    return e;
  }() + "\"";
}

std::string csv_number(const std::optional<double>& v) { return v ? fixed(*v, 6) : ""; }

}  // namespace

std::string render_metrics_table(std::span<const EvalReport> rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    cells.push_back({r.dataset, r.mechanism, cell(r.rouge1, 4), cell(r.rougeL, 4), cell(r.cosine_similarity, 4),
                     cell(r.perplexity_mean, 2), cell_with_std(r.utility_f1_mean, r.utility_f1_std)});
  }
  return render_grid({"Dataset", "Mechanism", "R1", "RL", "CS", "PPL", "F1"}, cells);
}

std::string render_privacy_table(std::span<const EvalReport> rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    cells.push_back({r.dataset, r.mechanism, cell_with_std(r.utility_f1_mean, r.utility_f1_std),
                     r.pp_plus ? std::to_string(*r.pp_plus) : "n/a", cell(r.privacy_f1_static, 2),
                     cell(r.relative_gain_static, 2),
                     cell_with_std(r.privacy_f1_adaptive_mean, r.privacy_f1_adaptive_std),
                     cell(r.relative_gain_adaptive, 2)});
  }
  return render_grid(
      {"Dataset", "Mechanism", "Utility F1", "PP+", "Static F1", "RG static", "Adaptive F1", "RG adaptive"}, cells);
}

std::string render_csv(std::span<const EvalReport> rows) {
  std::string out =
      "dataset,mechanism,rouge1,rougeL,cosine_similarity,perplexity_mean,utility_f1_mean,utility_f1_std,"
      "utility_f1_baseline,mg_utility,pp_plus,privacy_f1_static,privacy_f1_adaptive_mean,privacy_f1_adaptive_std,"
      "privacy_f1_baseline,mg_privacy,relative_gain_static,relative_gain_adaptive\n";
  for (const auto& r : rows) {
    const std::vector<std::string> fields = {csv_field(r.dataset),
                                             csv_field(r.mechanism),
                                             csv_number(r.rouge1),
                                             csv_number(r.rougeL),
                                             csv_number(r.cosine_similarity),
                                             csv_number(r.perplexity_mean),
                                             csv_number(r.utility_f1_mean),
                                             csv_number(r.utility_f1_std),
                                             csv_number(r.utility_f1_baseline),
                                             csv_number(r.mg_utility),
                                             r.pp_plus ? std::to_string(*r.pp_plus) : "",
                                             csv_number(r.privacy_f1_static),
                                             csv_number(r.privacy_f1_adaptive_mean),
                                             csv_number(r.privacy_f1_adaptive_std),
                                             csv_number(r.privacy_f1_baseline),
                                             csv_number(r.mg_privacy),
                                             csv_number(r.relative_gain_static),
                                             csv_number(r.relative_gain_adaptive)};
    for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + fields[i];
    out += "\n";
  }
  return out;
}

std::string render_cosine_csv(std::span<const CosineBySentences> rows) {
  std::string out = "sentence_count,mean_cosine,documents\n";
  for (const auto& r : rows) {
    out += std::to_string(r.sentence_count) + "," + fixed(r.mean_cosine, 6) + "," + std::to_string(r.documents) + "\n";
  }
  return out;
}

}  // namespace privfill
