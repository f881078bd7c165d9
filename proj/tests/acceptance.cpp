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


// Acceptance checks for the ten release criteria. Prints one PASS/FAIL line
// per criterion and exits non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "json.hpp"
#include "privfill/corpus_prep.hpp"
#include "privfill/dp_mechanism.hpp"
#include "privfill/evaluation.hpp"
#include "privfill/infill_dataset.hpp"
#include "privfill/providers.hpp"
#include "privfill/rewriter.hpp"
#include "privfill/stub_model.hpp"
#include "privfill/text.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace privfill;

const std::string kData = PRIVFILL_TEST_DATA_DIR;
const std::string kCli = PRIVFILL_CLI_PATH;

// Pinned tolerances.
constexpr double kConversionRelTol = 4 * std::numeric_limits<double>::epsilon();
constexpr double kTotalVariationMax = 0.01;
constexpr double kRatioRelTol = 0.05;
constexpr int kSamplerDraws = 200000;
constexpr double kSamplerSeconds = 10.0;
constexpr double kMajorityTol = 0.01;
constexpr double kGainTol = 0.02;
constexpr double kRougeSeconds = 5.0;
constexpr std::size_t kMinCleaningCases = 12;

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (detail.empty()) detail = what;
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------- 1

Outcome epsilon_temperature() {
  Outcome o;
  const double e15 = epsilon_from_temperature(1.5, 1.0);
  const double e10 = epsilon_from_temperature(1.0, 1.0);
  o.require(std::abs(e15 - 4.0 / 3.0) <= kConversionRelTol * (4.0 / 3.0), "T=1.5 gave " + num(e15));
  o.require(std::abs(e10 - 2.0) <= kConversionRelTol * 2.0, "T=1 gave " + num(e10));
  o.require(std::abs(temperature_from_epsilon(4.0 / 3.0, 1.0) - 1.5) <= kConversionRelTol * 1.5, "inverse at 4/3");
  o.require(std::abs(PrivacySpec::from_temperature(1.5).epsilon_per_token() - 4.0 / 3.0) <=
                kConversionRelTol * (4.0 / 3.0),
            "PrivacySpec");
  return o;
}

// ---------------------------------------------------------------- 2

Outcome dp_sampler() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const std::vector<double> u = {1.0, 0.75, 0.5, 0.25, 0.0};
  Eigen::VectorXd logits(5);
  for (int i = 0; i < 5; ++i) logits[i] = u[static_cast<std::size_t>(i)];
  const ClipBounds unit{0.0, 1.0};  // utilities pass through unchanged
  for (double t : {1.0, 1.5}) {
    const PrivacySpec spec = PrivacySpec::from_temperature(t, 1.0);
    std::vector<double> expected(5);
    double z = 0.0;
    for (std::size_t i = 0; i < 5; ++i) z += expected[i] = std::exp(u[i] / t);
    for (double& e : expected) e /= z;

    Rng rng(derive_seed(42, "sampler:" + num(t)));
    std::vector<double> counts(5, 0.0);
    for (int d = 0; d < kSamplerDraws; ++d) counts[dp_select_token(logits, unit, spec, rng)] += 1.0;
    double tv = 0.0;
    for (std::size_t i = 0; i < 5; ++i) tv += std::abs(counts[i] / kSamplerDraws - expected[i]);
    tv /= 2.0;
    o.require(tv < kTotalVariationMax, "TV " + num(tv) + " at T=" + num(t));
    for (std::size_t a = 0; a < 5; ++a) {
      for (std::size_t b = 0; b < 5; ++b) {
        if (a == b) continue;
        const double ratio = counts[a] / counts[b];
        const double target = std::exp(spec.epsilon_per_token() * (u[a] - u[b]) / 2.0);
        o.require(std::abs(ratio / target - 1.0) <= kRatioRelTol,
                  "ratio " + std::to_string(a) + "/" + std::to_string(b) + " = " + num(ratio) + " vs " + num(target));
      }
    }
  }
  o.require(seconds_since(start) < kSamplerSeconds, "took " + num(seconds_since(start)) + " s");
  return o;
}

// ---------------------------------------------------------------- 3

Outcome majority_baselines() {
  Outcome o;
  const std::vector<std::pair<double, double>> cases = {
      {1618.0 / 1730.0, 96.65}, {304.0 / 1730.0, 29.89}, {2713.0 / 2949.0, 95.83}, {0.5, 66.67}};
  for (const auto& [p, expected] : cases) {
    const double got = majority_f1(p);
    o.require(std::abs(got - expected) <= kMajorityTol, "p=" + num(p) + " gave " + num(got));
  }
  return o;
}

// ---------------------------------------------------------------- 4

Outcome relative_gains() {
  Outcome o;
  struct Case {
    const char* name;
    EvalInputs in;
    double expected;
  };
  const std::vector<Case> cases = {
      {"Trustpilot static DP-BART eps=1000", {99.57, 98.16, 72.46, 59.47, 95.83, 66.67}, 1.87},
      {"Trustpilot static PrivFill bart-large", {99.57, 98.63, 72.46, 60.16, 95.83, 66.67}, 1.87},
      {"Yelp adaptive DP-Prompt eps=2", {95.03, 93.49, 96.30, 19.44, 96.65, 29.89}, 2.11},
  };
  for (const auto& c : cases) {
    const double got = relative_gain(c.in);
    o.require(std::abs(got - c.expected) <= kGainTol, std::string(c.name) + " gave " + num(got));
  }
  return o;
}

// ---------------------------------------------------------------- 5

using Tokens = std::vector<std::string>;

double f_measure(std::size_t hits, std::size_t cand, std::size_t ref) {
  if (hits == 0) return 0.0;
  const double p = static_cast<double>(hits) / static_cast<double>(cand);
  const double r = static_cast<double>(hits) / static_cast<double>(ref);
  return 2 * p * r / (p + r);
}

double counted_rouge1(const Tokens& ref, const Tokens& cand) {
  std::vector<bool> used(ref.size(), false);
  std::size_t hits = 0;
  for (const auto& c : cand) {
    for (std::size_t i = 0; i < ref.size(); ++i) {
      if (!used[i] && ref[i] == c) {
        used[i] = true;
        ++hits;
        break;
      }
    }
  }
  return f_measure(hits, cand.size(), ref.size());
}

std::size_t enumerated_lcs(const Tokens& a, const Tokens& b) {
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
    Tokens sub;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (mask & (1u << i)) sub.push_back(a[i]);
    }
    std::size_t j = 0;
    for (std::size_t i = 0; i < b.size() && j < sub.size(); ++i) j += b[i] == sub[j];
    if (j == sub.size()) best = std::max(best, sub.size());
  }
  return best;
}

Outcome rouge_oracles() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  o.require(rouge_n_f("the cat sat", "the cat ran") == 2.0 / 3.0, "R1 hand fixture");
  o.require(rouge_l_f("the cat sat", "the cat ran") == 2.0 / 3.0, "RL hand fixture");
  o.require(rouge_l_f("alpha beta", "beta alpha") == 0.5, "RL reversed fixture");
  std::mt19937 gen(5);
  const Tokens alphabet = {"a", "b", "c", "d"};
  for (int trial = 0; trial < 100; ++trial) {
    Tokens ref(gen() % 11);
    Tokens cand(gen() % 11);
    for (auto& t : ref) t = alphabet[gen() % alphabet.size()];
    for (auto& t : cand) t = alphabet[gen() % alphabet.size()];
    o.require(rouge_n_f(ref, cand, 1) == counted_rouge1(ref, cand), "R1 trial " + std::to_string(trial));
    o.require(rouge_l_f(ref, cand) == f_measure(enumerated_lcs(ref, cand), cand.size(), ref.size()),
              "RL trial " + std::to_string(trial));
  }
  o.require(seconds_since(start) < kRougeSeconds, "took " + num(seconds_since(start)) + " s");
  return o;
}

// ---------------------------------------------------------------- 6

Outcome enron_cleaning() {
  Outcome o;
  std::ifstream in(kData + "/enron_cleaning_cases.json");
  const json cases = json::parse(in);
  o.require(cases.size() >= kMinCleaningCases, "only " + std::to_string(cases.size()) + " cases");
  std::size_t signoffs_hit = 0;
  for (const auto& s : default_signoffs()) {
    for (const auto& c : cases) {
      if (to_lower_ascii(c.at("body").get<std::string>()).find(to_lower_ascii(s)) != std::string::npos) {
        ++signoffs_hit;
        break;
      }
    }
  }
  o.require(signoffs_hit == default_signoffs().size(), "not every signoff has a case");
  for (const auto& c : cases) {
    const std::string name = c.at("name").get<std::string>();
    const CleanResult r = clean_enron_email({name, "user", "sent_items", c.at("body").get<std::string>()});
    if (c.at("expected").is_null()) {
      o.require(!r.text && r.dropped && std::string(to_string(*r.dropped)) == c.at("reason").get<std::string>(),
                name);
    } else {
      o.require(r.text && *r.text == c.at("expected").get<std::string>(), name);
      if (r.text) {
        const CleanResult again = clean_enron_email({name, "user", "sent_items", *r.text});
        o.require(again.text && *again.text == *r.text, name + " is not idempotent");
      }
    }
  }
  return o;
}

// ---------------------------------------------------------------- 7

Outcome stub_pipeline() {
  Outcome o;
  const Document doc{"four", "The food was great. Staff were kind. Prices were fair. We will return.", std::nullopt,
                     std::nullopt};
  const auto rewrite = [&doc](BudgetLedger& ledger) {
    StubModel model = StubModel::from_file(kData + "/stub_mixed.json");
    Rng rng = document_rng(42, doc.id);
    const RewriteOutput out =
        privfill_dp_rewrite(model, doc, GenerationLimits{512, 32}, kReferenceClipBounds,
                            PrivacySpec::from_epsilon(2.0), ledger, rng);
    return out;
  };
  BudgetLedger ledger;
  const RewriteOutput out = rewrite(ledger);
  std::size_t tokens = 0;
  for (std::size_t t : out.tokens_generated) tokens += t;
  o.require(out.sentence_outputs.size() == 4, "sentence outputs: " + std::to_string(out.sentence_outputs.size()));
  o.require(ledger.size() == 4, "ledger entries: " + std::to_string(ledger.size()));
  o.require(total_epsilon(ledger) == 2.0 * static_cast<double>(tokens), "total epsilon mismatch");
  o.require(out.total_epsilon && *out.total_epsilon == total_epsilon(ledger), "output total mismatch");
  o.require(total_epsilon(ledger) <= 256.0, "budget above 4 * 32 * 2");
  BudgetLedger second;
  o.require(to_record(rewrite(second), 42).dump() == to_record(out, 42).dump(), "rerun differs");
  return o;
}

// ---------------------------------------------------------------- 8

Outcome prompt_construction() {
  Outcome o;
  std::ifstream in(kData + "/corpus50.jsonl");
  std::string line;
  std::size_t docs = 0;
  while (std::getline(in, line)) {
    const Document d = json::parse(line).get<Document>();
    ++docs;
    const auto spans = segment_sentences(d.text);
    for (std::size_t i = 0; i < spans.size(); ++i) {
      const std::string prompt = build_infill_prompt(d, i);
      const std::string rebuilt =
          d.text.substr(0, spans[i].begin) + "[blank]" + d.text.substr(spans[i].end);
      o.require(count_occurrences(prompt, "[blank]") == 1, d.id + " blank count");
      o.require(prompt == rebuilt, d.id + " sentence " + std::to_string(i) + " changed other text");
    }
    const std::vector<std::string> sentences = split_sentences(d.text);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      const InfillSample s = build_wiki_sample_at(sentences, i);
      const std::size_t lo = i >= 2 ? i - 2 : 0;
      const std::size_t hi = std::min(sentences.size(), i + 3);
      o.require(hi - lo <= 5, d.id + " window too wide");
      std::vector<std::string> window(sentences.begin() + static_cast<std::ptrdiff_t>(lo),
                                      sentences.begin() + static_cast<std::ptrdiff_t>(hi));
      window[i - lo] = "[blank]";
      o.require(s.input_text == join(window, " ") && s.target_text == sentences[i], d.id + " wiki window");
      if (i >= 2 && i + 2 < sentences.size()) o.require(i - lo == 2 && hi - i == 3, d.id + " blank not centered");
    }
  }
  o.require(docs == 50, "fixture has " + std::to_string(docs) + " documents");
  return o;
}

// ---------------------------------------------------------------- 9

Outcome attack_sanity() {
  Outcome o;
  std::vector<Document> docs;
  std::map<std::string, std::string> truth;
  for (int i = 0; i < 20; ++i) {
    const std::string author = i % 3 == 0 ? "x" : (i % 3 == 1 ? "y" : "z");
    docs.push_back({"a" + std::to_string(i), "Note number " + std::to_string(i) + ".", "u", author});
    truth[docs.back().text] = author;
  }
  OracleTrainer oracle(truth);
  const double st = run_privacy_attack(AttackProtocol::kStatic, docs, docs, oracle, 42).mean;
  const double ad = run_privacy_attack(AttackProtocol::kAdaptive, docs, docs, oracle, 42).mean;
  o.require(st == 100.0 && ad == 100.0, "oracle gave " + num(st) + " / " + num(ad));

  std::vector<Document> constant = docs;
  for (auto& d : constant) d.text = "same";
  MajorityTrainer majority;
  const double got = run_privacy_attack(AttackProtocol::kAdaptive, docs, constant, majority, 42).mean;
  // Enumeration: the training majority label scored on the validation items.
  const HoldoutSplit split = holdout_split(docs.size(), 42);
  std::map<std::string, int> counts;
  for (std::size_t i : split.train) ++counts[*docs[i].privacy_label];
  const auto best = std::max_element(counts.begin(), counts.end(),
                                     [](const auto& a, const auto& b) { return a.second < b.second; });
  int hits = 0;
  for (std::size_t i : split.validation) hits += *docs[i].privacy_label == best->first;
  const double expected = 100.0 * hits / static_cast<double>(split.validation.size());
  o.require(got == expected, "constant attack " + num(got) + " vs enumerated " + num(expected));
  return o;
}

// ---------------------------------------------------------------- 10

std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    files[fs::relative(entry.path(), root).string()] = s.str();
  }
  return files;
}

Outcome cli_determinism() {
  Outcome o;
  const fs::path base = fs::temp_directory_path() / ("privfill_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(base);
  fs::create_directories(base / "shared");
  {
    std::ofstream(base / "shared" / "labels.json")
        << R"({"utility": {"field": "rating", "mapping": {"1": "negative", "2": "negative", "5": "positive"}},)"
        << R"( "privacy": {"field": "gender"}})";
    std::ofstream wiki(base / "shared" / "wiki.jsonl");
    std::ifstream corpus(kData + "/corpus50.jsonl");
    std::string line;
    while (std::getline(corpus, line)) wiki << json{{"text", json::parse(line).at("text")}}.dump() << "\n";
  }
  ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  ::unsetenv("TOOLKIT_CONFIG");
  ::unsetenv("TOOLKIT_MODEL_ENDPOINT");
  ::unsetenv("TOOLKIT_CACHE_DIR");

  const std::string labeled = kData + "/labeled_corpus.jsonl";
  const std::string stub = "stub:" + kData + "/stub_mixed.json";
  const std::string shared = (base / "shared").string();
  std::vector<std::map<std::string, std::string>> runs;
  for (const char* name : {"run1", "run2"}) {
    const fs::path dir = base / name;
    fs::create_directories(dir);
    const std::string d = dir.string();
    const std::vector<std::pair<std::string, std::vector<std::string>>> commands = {
        {"prep_enron", {"prep", "--source", "enron", "--in", kData + "/maildir", "--out", d + "/enron"}},
        {"prep_trustpilot",
         {"prep", "--source", "trustpilot", "--in", kData + "/trustpilot_sample.jsonl", "--labels",
          shared + "/labels.json", "--out", d + "/trustpilot"}},
        {"calibrate", {"calibrate", "--backend", stub, "--in", labeled, "--out", d + "/calibration.json"}},
        {"rewrite_privfill",
         {"rewrite", "--mechanism", "privfill", "--backend", stub, "--in", labeled, "--out", d + "/privfill.jsonl"}},
        {"rewrite_privfill_dp",
         {"rewrite", "--mechanism", "privfill_dp", "--epsilon", "2", "--backend", stub, "--in", labeled, "--out",
          d + "/privfill_dp.jsonl", "--workers", "3"}},
        {"rewrite_dp_prompt",
         {"rewrite", "--mechanism", "dp_prompt", "--epsilon", "2", "--backend", stub, "--in", labeled, "--out",
          d + "/dp_prompt.jsonl"}},
        {"evaluate_utility",
         {"evaluate", "--kind", "utility", "--originals", labeled, "--rewritten", d + "/privfill_dp.jsonl",
          "--dataset", "labeled", "--mechanism", "privfill_dp", "--out", d + "/utility.json"}},
        {"evaluate_privacy",
         {"evaluate", "--kind", "privacy", "--originals", labeled, "--rewritten", d + "/privfill_dp.jsonl",
          "--dataset", "labeled", "--mechanism", "privfill_dp", "--out", d + "/privacy.json"}},
        {"evaluate_metrics",
         {"evaluate", "--kind", "metrics", "--originals", labeled, "--rewritten", d + "/privfill_dp.jsonl",
          "--dataset", "labeled", "--mechanism", "privfill_dp", "--out", d + "/metrics.json", "--cosine-csv",
          d + "/cosine.csv"}},
        {"report",
         {"report", d + "/utility.json", d + "/privacy.json", d + "/metrics.json", "--csv", d + "/tables.csv",
          "--out", d + "/tables.txt"}},
        {"infill_data", {"infill-data", "--source", "wiki", "--in", shared + "/wiki.jsonl", "--out", d + "/infill"}},
        {"train_manifest", {"train-manifest", "--set", "epochs=2", "--out", d + "/train_manifest.json"}},
    };
    for (const auto& [label, args] : commands) {
      std::string cmd = quote(kCli);
      for (const auto& a : args) cmd += " " + quote(a);
      // Paths differ between runs, so stdout is kept only when it holds none.
      const bool keep_stdout = label != "calibrate";
      cmd += keep_stdout ? " > " + quote(d + "/" + label + ".stdout") : " > /dev/null";
      cmd += " 2> " + quote((base / (std::string(name) + "_" + label + ".stderr")).string());
      const int status = std::system(cmd.c_str());
      o.require(status == 0, label + " exited with status " + std::to_string(status));
    }
    runs.push_back(snapshot(dir));
  }
  o.require(runs[0].size() >= 25, "only " + std::to_string(runs[0].size()) + " output files");
  for (const auto& [file, content] : runs[0]) {
    const auto it = runs[1].find(file);
    o.require(it != runs[1].end(), file + " missing from the second run");
    if (it != runs[1].end()) o.require(it->second == content, file + " differs between runs");
  }
  o.require(runs[0].size() == runs[1].size(), "file sets differ");
  if (o.pass) fs::remove_all(base);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 epsilon/temperature conversion", epsilon_temperature},
      {"2 DP sampler distribution", dp_sampler},
      {"3 majority-guess baselines", majority_baselines},
      {"4 relative gain", relative_gains},
      {"5 ROUGE oracle equivalence", rouge_oracles},
      {"6 Enron cleaning fixtures", enron_cleaning},
      {"7 end-to-end stub pipeline", stub_pipeline},
      {"8 prompt construction", prompt_construction},
      {"9 attack-protocol sanity", attack_sanity},
      {"10 CLI determinism", cli_determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name;
    if (!o.pass) std::cout << " (" << o.detail << ")";
    std::cout << "\n";
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
