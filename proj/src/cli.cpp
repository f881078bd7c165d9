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

#include "privfill/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "CLI11.hpp"
#include "privfill/errors.hpp"
#include "privfill/evaluation.hpp"
#include "privfill/infill_dataset.hpp"
#include "privfill/logging.hpp"
#include "privfill/providers.hpp"
#include "privfill/report.hpp"
#include "privfill/text.hpp"

namespace privfill {

namespace fs = std::filesystem;
using nlohmann::json;

LabelTaskSpec default_label_task(std::string_view source) {
  LabelTaskSpec spec;
  if (source == "arxiv") {
    spec.text_field = "abstract";
    spec.utility = LabelRule{"terms", true, {}, false, 10};
  } else if (source == "bbc") {
    spec.utility = LabelRule{"category", true, {}, false, std::nullopt};
  } else if (source == "docnli") {
    spec.text_field = "premise";
    spec.utility = LabelRule{"label", true, {}, false, std::nullopt};
    spec.sample_fraction = 0.01;
  } else if (source == "trustpilot") {
    spec.utility = LabelRule{
        "rating", true, {{"1", "negative"}, {"2", "negative"}, {"5", "positive"}}, false, std::nullopt};
    spec.privacy = LabelRule{"gender", true, {}, false, std::nullopt};
    spec.sample_fraction = 0.1;
  } else if (source == "yelp") {
    spec.text_field = "review";
    spec.utility = LabelRule{"label", true, {}, false, std::nullopt};
    spec.privacy = LabelRule{"user_id", true, {}, false, std::nullopt};
  } else {
    throw UsageError("no built-in label task for source '" + std::string(source) + "'");
  }
  return spec;
}

int default_min_sentences(std::string_view source) { return source == "trustpilot" || source == "enron" ? 2 : 1; }

namespace {

constexpr const char* kLineIdField = "_line";

template <typename T>
std::optional<T> first_of(const std::optional<T>& a, const std::optional<T>& b) {
  return a ? a : b;
}

std::string pretty(const json& j) { return j.dump(2) + "\n"; }

std::string format_number(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// Compact form that round-trips exactly, for summaries.
std::string format_value(double v) { return json(v).dump(); }

class ScopedLogSink {
 public:
  explicit ScopedLogSink(std::ostream& err)
      : previous_(set_log_sink([&err](LogLevel level, std::string_view message) {
          err << (level == LogLevel::kWarning ? "warning: " : "info: ") << message << "\n";
        })) {}
  ~ScopedLogSink() { set_log_sink(std::move(previous_)); }
  ScopedLogSink(const ScopedLogSink&) = delete;
  ScopedLogSink& operator=(const ScopedLogSink&) = delete;

 private:
  LogSink previous_;
};

// ---------------------------------------------------------------- prep

struct PrepArgs {
  std::string source;
  std::string in;
  std::string out;
  std::optional<std::string> labels;
  std::optional<int> min_sentences;
  double percentile = 80.0;
  std::string folder = "sent_items";
};

std::string id_of(const json& record, const std::string& field) {
  const json& v = record.at(field);
  return v.is_string() ? v.get<std::string>() : v.dump();
}

int cmd_prep_enron(const PrepArgs& a, std::ostream& out) {
  if (!fs::is_directory(a.in)) throw DataError("'" + a.in + "' is not a maildir directory");
  const std::vector<RawEmail> emails = read_maildir(a.in, a.folder);
  if (emails.empty()) throw DataError("no messages found under '" + a.in + "' in folder '" + a.folder + "'");
  EnronPrepOptions options;
  options.min_sentences = a.min_sentences.value_or(default_min_sentences("enron"));
  options.percentile = a.percentile;
  const EnronPrepResult result = prepare_enron(emails, options);

  std::vector<json> docs(result.documents.begin(), result.documents.end());
  std::vector<json> drops(result.drops.begin(), result.drops.end());
  json stats = result.stats;
  stats["source"] = "enron";
  stats["threshold"] = result.threshold;
  stats["users"] = result.users;

  write_file((fs::path(a.out) / "documents.jsonl").string(), to_jsonl(docs));
  write_file((fs::path(a.out) / "drops.jsonl").string(), to_jsonl(drops));
  write_file((fs::path(a.out) / "errors.jsonl").string(), "");
  write_file((fs::path(a.out) / "stats.json").string(), pretty(stats));
  out << "read " << result.stats.input_count << " emails, kept " << result.stats.output_count << " documents from "
      << result.users.size() << " authors (threshold " << result.threshold << ")\n";
  return kExitOk;
}

int cmd_prep_labeled(const PrepArgs& a, std::ostream& out) {
  LabelTaskSpec spec = default_label_task(a.source);
  if (a.labels) spec = json::parse(read_file(*a.labels)).get<LabelTaskSpec>();
  const int min_sentences = a.min_sentences.value_or(default_min_sentences(a.source));
  if (min_sentences < 1) throw UsageError("--min-sentences must be >= 1");
  const bool line_ids = spec.id_field.empty();
  if (line_ids) spec.id_field = kLineIdField;

  std::vector<json> errors;
  std::vector<json> drops;
  std::vector<json> records;
  std::size_t seen = 0;
  const auto note_error = [&errors](std::size_t line, const std::string& message) {
    errors.push_back({{"line", line}, {"error", message}});
  };
  read_jsonl_lenient(
      a.in,
      [&](const json& record, std::size_t line) {
        ++seen;
        json r = record;
        if (!r.is_object() || !r.contains(spec.text_field) || !r.at(spec.text_field).is_string()) {
          note_error(line, "no string field '" + spec.text_field + "'");
          return;
        }
        if (line_ids) r[kLineIdField] = std::to_string(line);
        if (!r.contains(spec.id_field)) {
          note_error(line, "no id field '" + spec.id_field + "'");
          return;
        }
        for (const auto* rule : {&spec.utility, &spec.privacy}) {
          if (*rule && !r.contains((*rule)->field)) {
            note_error(line, "no label field '" + (*rule)->field + "'");
            return;
          }
        }
        if (static_cast<int>(segment_sentences(r.at(spec.text_field).get<std::string>()).size()) < min_sentences) {
          drops.push_back({{"id", id_of(r, spec.id_field)}, {"reason", "too_few_sentences"}});
          return;
        }
        records.push_back(std::move(r));
      },
      [&](std::size_t line, const std::string& message) {
        ++seen;
        note_error(line, message);
      });
  if (seen == 0) throw DataError("no records in '" + a.in + "'");
  if (errors.size() == seen) {
    write_file((fs::path(a.out) / "errors.jsonl").string(), to_jsonl(errors));
    throw DataError("every record in '" + a.in + "' is malformed; see errors.jsonl");
  }

  LabelTaskSpec unsampled = spec;
  unsampled.sample_fraction.reset();
  const std::vector<Document> labeled = build_label_task(records, unsampled);
  const std::vector<Document> documents = build_label_task(records, spec);

  // Both lists keep input order, so one pass classifies every record.
  std::size_t li = 0;
  std::size_t di = 0;
  std::size_t unlabeled = 0;
  std::size_t sampled_out = 0;
  for (const auto& r : records) {
    const std::string id = id_of(r, spec.id_field);
    if (li < labeled.size() && labeled[li].id == id) {
      ++li;
      if (di < documents.size() && documents[di].id == id) {
        ++di;
      } else {
        ++sampled_out;
        drops.push_back({{"id", id}, {"reason", "sampled_out"}});
      }
    } else {
      ++unlabeled;
      drops.push_back({{"id", id}, {"reason", "unlabeled"}});
    }
  }

  const std::size_t short_count = drops.size() - unlabeled - sampled_out;
  const json stats = {{"source", a.source},           {"input_count", seen},
                      {"malformed", errors.size()},   {"dropped_short", short_count},
                      {"dropped_unlabeled", unlabeled}, {"sampled_out", sampled_out},
                      {"output_count", documents.size()}};
  std::vector<json> docs(documents.begin(), documents.end());
  write_file((fs::path(a.out) / "documents.jsonl").string(), to_jsonl(docs));
  write_file((fs::path(a.out) / "drops.jsonl").string(), to_jsonl(drops));
  write_file((fs::path(a.out) / "errors.jsonl").string(), to_jsonl(errors));
  write_file((fs::path(a.out) / "stats.json").string(), pretty(stats));
  out << "read " << seen << " records, kept " << documents.size() << " documents";
  if (!errors.empty()) out << " (" << errors.size() << " malformed, see errors.jsonl)";
  out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::optional<std::string> backend;
  std::string in;
  std::optional<std::string> out;
  std::size_t count = 100;
  std::optional<int> max_len;
  std::optional<int> max_new_tokens;
};

int cmd_calibrate(const CalibrateArgs& a, const ToolkitConfig& config, std::ostream& out) {
  const auto backend = first_of(a.backend, config.backend);
  if (!backend) throw UsageError("calibrate needs --backend");
  CalibrationOptions options;
  options.count = a.count;
  options.max_len = first_of(a.max_len, config.max_len).value_or(options.max_len);
  options.max_new_tokens = first_of(a.max_new_tokens, config.max_new_tokens).value_or(options.max_new_tokens);
  const std::vector<Document> docs = read_documents(a.in);
  std::vector<std::string> texts;
  for (const auto& d : docs) texts.push_back(d.text);
  auto model = make_model_factory(*backend, config.retry)();
  const CalibrationReport report = calibrate_bounds(*model, texts, options);
  const std::string body = pretty(json(report));

  std::optional<std::string> target = a.out;
  if (!target && config.cache_dir) {
    std::string name = report.provider_id;
    std::replace_if(name.begin(), name.end(), [](char c) { return !std::isalnum(static_cast<unsigned char>(c)) && c != '-'; }, '_');
    target = (fs::path(*config.cache_dir) / ("calibration-" + name + ".json")).string();
  }
  if (target) {
    write_file(*target, body);
    out << "logit range [" << format_value(report.bounds.logit_min) << ", " << format_value(report.bounds.logit_max)
        << "] from " << report.sample_count << " texts -> " << *target << "\n";
  } else {
    out << body;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- rewrite

struct RewriteArgs {
  std::optional<std::string> mechanism;
  std::optional<std::string> backend;
  std::string in;
  std::string out;
  std::optional<std::string> manifest;
  std::optional<double> epsilon;
  std::optional<double> temperature;
  std::optional<double> sensitivity;
  std::optional<double> logit_min;
  std::optional<double> logit_max;
  std::optional<std::string> calibration;
  std::optional<int> max_len;
  std::optional<int> max_new_tokens;
  std::optional<std::string> paraphrase_template;
  bool force = false;
};

int cmd_rewrite(const RewriteArgs& a, const ToolkitConfig& config, std::uint64_t seed, int workers,
                const Environment& env, std::ostream& out) {
  // Everything is validated before any document is read.
  const auto mechanism_name = first_of(a.mechanism, config.mechanism);
  if (!mechanism_name) throw UsageError("rewrite needs --mechanism (privfill, privfill_dp or dp_prompt)");
  RewriteConfig rc;
  rc.mechanism = parse_mechanism(*mechanism_name);
  const auto backend = first_of(a.backend, config.backend);
  if (!backend) throw UsageError("rewrite needs --backend (stub:<fixture.json> or http://host:port)");

  const auto epsilon = first_of(a.epsilon, config.epsilon);
  const auto temperature = first_of(a.temperature, config.temperature);
  const auto sensitivity = first_of(a.sensitivity, config.sensitivity);
  const auto logit_min = first_of(a.logit_min, config.logit_min);
  const auto logit_max = first_of(a.logit_max, config.logit_max);
  rc.limits.max_len = first_of(a.max_len, config.max_len).value_or(rc.limits.max_len);
  rc.limits.max_new_tokens = first_of(a.max_new_tokens, config.max_new_tokens).value_or(rc.limits.max_new_tokens);
  if (const auto tpl = first_of(a.paraphrase_template, config.paraphrase_template)) {
    if (rc.mechanism != Mechanism::kDpPrompt) throw UsageError("--paraphrase-template only applies to dp_prompt");
    rc.paraphrase_template = *tpl;
  }

  json parameters = {{"mechanism", std::string(to_string(rc.mechanism))},
                     {"max_len", rc.limits.max_len},
                     {"max_new_tokens", rc.limits.max_new_tokens}};
  if (is_dp(rc.mechanism)) {
    if (epsilon && temperature) throw UsageError("give either --epsilon or --temperature, not both");
    if (!epsilon && !temperature) {
      throw UsageError(std::string(to_string(rc.mechanism)) + " needs an explicit --epsilon (per token)");
    }
    const double delta = sensitivity.value_or(1.0);
    rc.spec = epsilon ? PrivacySpec::from_epsilon(*epsilon, delta) : PrivacySpec::from_temperature(*temperature, delta);
    if (a.calibration && (logit_min || logit_max)) {
      throw UsageError("give either --calibration or --logit-min/--logit-max, not both");
    }
    if (logit_min.has_value() != logit_max.has_value()) throw UsageError("--logit-min and --logit-max go together");
    if (a.calibration) {
      rc.bounds = json::parse(read_file(*a.calibration)).get<CalibrationReport>().bounds;
    } else if (logit_min) {
      rc.bounds = ClipBounds::make(*logit_min, *logit_max);
    } else {
      rc.bounds = kReferenceClipBounds;
    }
    parameters["epsilon_per_token"] = rc.spec->epsilon_per_token();
    parameters["sensitivity"] = rc.spec->sensitivity();
    parameters["temperature"] = rc.spec->temperature();
    parameters["logit_min"] = rc.bounds->logit_min;
    parameters["logit_max"] = rc.bounds->logit_max;
    if (rc.mechanism == Mechanism::kDpPrompt) parameters["paraphrase_template"] = rc.paraphrase_template;
  } else {
    if (epsilon || sensitivity || logit_min || logit_max || a.calibration) {
      throw UsageError("privfill is not a DP mechanism: --epsilon, --sensitivity, --logit-min/--logit-max and "
                       "--calibration are not accepted");
    }
    rc.privfill.temperature = temperature.value_or(1.0);
    parameters["temperature"] = rc.privfill.temperature;
  }
  rc.validate();

  const std::string manifest_path = a.manifest.value_or(a.out + ".manifest.json");
  if (!a.force && fs::exists(manifest_path)) {
    throw UsageError("manifest '" + manifest_path + "' already exists; manifests are not overwritten without --force");
  }

  RunManifest manifest;
  manifest.command = "rewrite";
  manifest.seed = seed;
  manifest.input = a.in;
  manifest.output = fs::path(a.out).filename().string();
  manifest.started_at = run_timestamp(env);

  const std::vector<Document> docs = read_documents(a.in);
  const ModelFactory factory = make_model_factory(*backend, config.retry);
  manifest.providers["model"] = factory()->id();
  manifest.parameters = parameters;
  manifest.config_hash =
      config_hash({{"command", "rewrite"}, {"parameters", parameters}, {"providers", manifest.providers}, {"seed", seed}});

  BudgetLedger ledger;
  const std::vector<RewriteOutput> outputs = rewrite_corpus(docs, factory, rc, seed, workers, ledger);

  std::vector<json> records;
  records.reserve(outputs.size());
  std::size_t tokens = 0;
  for (const auto& o : outputs) {
    records.push_back(to_record(o, seed));
    for (std::size_t t : o.tokens_generated) tokens += t;
  }
  manifest.documents = outputs.size();
  manifest.budget.entries = ledger.size();
  manifest.budget.tokens_generated = tokens;
  if (is_dp(rc.mechanism)) manifest.budget.total_epsilon = total_epsilon(ledger);
  manifest.finished_at = run_timestamp(env);

  write_file(a.out, to_jsonl(records));
  write_file(manifest_path, pretty(json(manifest)));

  out << "documents: " << outputs.size() << "\n";
  out << "mean tokens: "
      << format_number(outputs.empty() ? 0.0 : static_cast<double>(tokens) / static_cast<double>(outputs.size()), 2)
      << "\n";
  if (manifest.budget.total_epsilon) out << "total epsilon: " << format_value(*manifest.budget.total_epsilon) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string kind;
  std::string originals;
  std::optional<std::string> rewritten;
  std::string out;
  std::string dataset = "dataset";
  std::optional<std::string> mechanism;
  std::optional<std::string> trainer;
  std::optional<std::string> embedder;
  std::optional<std::string> scorer;
  std::optional<double> mg_utility;
  std::optional<double> mg_privacy;
  std::optional<std::string> cosine_csv;
};

int cmd_evaluate(const EvaluateArgs& a, const ToolkitConfig& config, std::uint64_t seed, std::ostream& out) {
  for (const auto& mg : {a.mg_utility, a.mg_privacy}) {
    if (mg && !(*mg >= 0.0 && *mg <= 100.0)) throw UsageError("guessing baselines are percentages in [0, 100]");
  }
  if (a.kind != "utility" && !a.rewritten) throw UsageError(a.kind + " evaluation needs --rewritten");
  if (a.cosine_csv && a.kind != "metrics") throw UsageError("--cosine-csv only applies to --kind metrics");

  const std::vector<Document> originals = read_documents(a.originals);
  if (originals.empty()) throw DataError("'" + a.originals + "' holds no documents");
  std::vector<Document> rewritten;
  if (a.rewritten) rewritten = align_rewritten(originals, read_rewritten(*a.rewritten));

  EvalReport report;
  report.dataset = a.dataset;
  report.mechanism = a.mechanism.value_or(a.rewritten ? "rewritten" : "original");
  report.kind = a.kind;
  report.seed = seed;
  report.documents = originals.size();

  if (a.kind == "utility" || a.kind == "privacy") {
    const std::string trainer_id = first_of(a.trainer, config.trainer).value_or("naive-bayes");
    auto trainer = make_trainer(trainer_id);
    report.providers["classifier"] = trainer->id();
    if (a.kind == "utility") {
      const F1Summary baseline = run_utility_eval(originals, *trainer, seed);
      const F1Summary summary = a.rewritten ? run_utility_eval(rewritten, *trainer, seed) : baseline;
      report.utility_f1_mean = summary.mean;
      report.utility_f1_std = summary.std;
      report.utility_f1_baseline = baseline.mean;
      report.mg_utility = a.mg_utility.value_or(majority_f1(baseline.validation_majority_fraction));
      out << "utility F1 " << format_number(summary.mean, 2) << " (" << format_number(summary.std, 2)
          << "), original " << format_number(baseline.mean, 2) << "\n";
    } else {
      const F1Summary baseline = run_privacy_attack(AttackProtocol::kStatic, originals, originals, *trainer, seed);
      const F1Summary st = run_privacy_attack(AttackProtocol::kStatic, originals, rewritten, *trainer, seed);
      const F1Summary ad = run_privacy_attack(AttackProtocol::kAdaptive, originals, rewritten, *trainer, seed);
      report.privacy_f1_baseline = baseline.mean;
      report.privacy_f1_static = st.mean;
      report.privacy_f1_adaptive_mean = ad.mean;
      report.privacy_f1_adaptive_std = ad.std;
      report.mg_privacy = a.mg_privacy.value_or(majority_f1(baseline.validation_majority_fraction));
      out << "privacy F1 static " << format_number(st.mean, 2) << ", adaptive " << format_number(ad.mean, 2) << " ("
          << format_number(ad.std, 2) << "), original " << format_number(baseline.mean, 2) << "\n";
    }
  } else if (a.kind == "metrics") {
    const std::string embedder_id = first_of(a.embedder, config.embedder).value_or("hashed-bow");
    const std::string scorer_id = first_of(a.scorer, config.scorer).value_or("unigram");
    std::vector<std::string> original_texts;
    std::vector<std::string> rewritten_texts;
    for (const auto& d : originals) original_texts.push_back(d.text);
    for (const auto& d : rewritten) rewritten_texts.push_back(d.text);
    std::unique_ptr<EmbeddingProvider> embedder;
    if (embedder_id != "none") {
      embedder = make_embedder(embedder_id);
      report.providers["embedder"] = embedder->id();
    }
    std::unique_ptr<CausalScorer> scorer;
    if (scorer_id == "unigram") {
      scorer = std::make_unique<UnigramScorer>(original_texts);
      report.providers["scorer"] = scorer->id();
    } else if (scorer_id != "none") {
      throw UsageError("unknown scorer '" + scorer_id + "' (expected unigram or none)");
    }
    const TextMetrics m = compute_text_metrics(original_texts, rewritten_texts, embedder.get(), scorer.get());
    report.rouge1 = m.rouge1;
    report.rougeL = m.rougeL;
    report.cosine_similarity = m.cosine_similarity;
    if (embedder) report.cosine_skipped = m.cosine_skipped;
    if (m.perplexity) {
      report.perplexity_mean = m.perplexity->mean;
      report.perplexity_skipped = m.perplexity->skipped;
    }
    if (a.cosine_csv) {
      if (!embedder) throw UsageError("--cosine-csv needs an embedder");
      write_file(*a.cosine_csv, render_cosine_csv(cosine_by_sentence_count(original_texts, rewritten_texts, *embedder)));
    }
    out << "R1 " << format_number(m.rouge1, 4) << ", RL " << format_number(m.rougeL, 4);
    if (m.cosine_similarity) out << ", CS " << format_number(*m.cosine_similarity, 4);
    if (m.perplexity) out << ", PPL " << format_number(m.perplexity->mean, 2);
    out << "\n";
  } else {
    throw UsageError("unknown evaluation kind '" + a.kind + "'");
  }
  finalize_report(report);
  write_file(a.out, pretty(json(report)));
  return kExitOk;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::vector<std::string> inputs;
  std::optional<std::string> csv;
  std::optional<std::string> out;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
  std::vector<EvalReport> reports;
  for (const auto& path : a.inputs) {
    json j;
    try {
      j = json::parse(read_file(path));
    } catch (const json::exception& e) {
      throw DataError("'" + path + "' is not valid JSON: " + e.what());
    }
    try {
      reports.push_back(j.get<EvalReport>());
    } catch (const DataError& e) {
      throw DataError(path + ": " + e.what());
    }
  }
  const std::vector<EvalReport> rows = combine_reports(reports);
  const std::string tables = render_metrics_table(rows) + "\n" + render_privacy_table(rows);
  out << tables;
  if (a.out) write_file(*a.out, tables);
  if (a.csv) write_file(*a.csv, render_csv(rows));
  return kExitOk;
}

// ---------------------------------------------------------------- infill-data

struct InfillArgs {
  std::string source;
  std::vector<std::string> inputs;
  std::string format = "jsonl";
  std::string field = "text";
  std::string out;
  double train_fraction = 0.99;
  bool keep_markup = false;
};

int cmd_infill_data(const InfillArgs& a, std::uint64_t seed, std::ostream& out) {
  const SampleSource source = parse_sample_source(a.source.ends_with("_style") ? a.source : a.source + "_style");
  if (!(a.train_fraction > 0.0 && a.train_fraction <= 1.0)) throw UsageError("--train-fraction must lie in (0, 1]");
  std::vector<std::string> documents;
  for (const auto& path : a.inputs) {
    std::istringstream in(read_file(path));
    read_corpus(in, a.format, a.field, [&](std::string_view doc) {
      documents.push_back(source == SampleSource::kWikiStyle && !a.keep_markup ? strip_wiki_markup(doc)
                                                                                 : std::string(doc));
    });
  }
  const std::vector<InfillSample> samples = build_samples(documents, source, seed);
  const SampleSplit split = merge_and_split(samples, a.train_fraction, seed);
  std::vector<json> train(split.train.begin(), split.train.end());
  std::vector<json> validation(split.validation.begin(), split.validation.end());
  write_file((fs::path(a.out) / "train.jsonl").string(), to_jsonl(train));
  write_file((fs::path(a.out) / "validation.jsonl").string(), to_jsonl(validation));
  out << documents.size() << " documents, " << samples.size() << " samples: " << train.size() << " train, "
      << validation.size() << " validation\n";
  return kExitOk;
}

// ---------------------------------------------------------------- train-manifest

struct TrainManifestArgs {
  std::vector<std::string> sets;
  std::optional<std::string> overrides;
  std::optional<std::string> out;
};

int cmd_train_manifest(const TrainManifestArgs& a, std::ostream& out) {
  json overrides = json::object();
  if (a.overrides) {
    try {
      overrides = json::parse(read_file(*a.overrides));
    } catch (const json::exception& e) {
      throw UsageError("overrides file is not valid JSON: " + std::string(e.what()));
    }
    if (!overrides.is_object()) throw UsageError("overrides must be a JSON object");
  }
  for (const auto& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + kv + "'");
    const std::string value = kv.substr(eq + 1);
    json parsed = json::parse(value, nullptr, false);
    overrides[kv.substr(0, eq)] = parsed.is_discarded() ? json(value) : parsed;
  }
  const std::string body = pretty(emit_training_manifest(overrides));
  if (a.out) {
    write_file(*a.out, body);
  } else {
    out << body;
  }
  return kExitOk;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err, const Environment& env) {
  CLI::App app{"Document rewriting with sentence infilling and differential privacy", "privfill"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "privfill 1.0.0");

  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed_flag;
  std::optional<int> workers_flag;
  app.add_option("--config", config_path, "JSON config file (default: $TOOLKIT_CONFIG)");
  app.add_option("--seed", seed_flag, "Random seed (default 42)");
  app.add_option("--workers", workers_flag, "Worker threads (default 1)");

  PrepArgs prep;
  auto* prep_cmd = app.add_subcommand("prep", "Prepare a corpus as document JSONL");
  prep_cmd->add_option("--source", prep.source, "Corpus kind")
      ->required()
      ->check(CLI::IsMember({"enron", "trustpilot", "yelp", "arxiv", "bbc", "docnli"}));
  prep_cmd->add_option("--in", prep.in, "Maildir root (enron) or JSONL file")->required();
  prep_cmd->add_option("--out", prep.out, "Output directory")->required();
  prep_cmd->add_option("--labels", prep.labels, "Label task JSON replacing the built-in one");
  prep_cmd->add_option("--min-sentences", prep.min_sentences, "Minimum sentences per document");
  prep_cmd->add_option("--percentile", prep.percentile, "Author frequency percentile (enron)");
  prep_cmd->add_option("--folder", prep.folder, "Mail folder to read (enron)");

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "Measure the logit range of a model backend");
  cal_cmd->add_option("--backend", cal.backend, "stub:<fixture.json> or http://host:port");
  cal_cmd->add_option("--in", cal.in, "Document JSONL with sample texts")->required();
  cal_cmd->add_option("--out", cal.out, "Calibration report path");
  cal_cmd->add_option("--count", cal.count, "Number of sample texts")->check(CLI::PositiveNumber);
  cal_cmd->add_option("--max-len", cal.max_len, "Prompt length limit in tokens");
  cal_cmd->add_option("--max-new-tokens", cal.max_new_tokens, "Decoding steps per text");

  RewriteArgs rw;
  auto* rw_cmd = app.add_subcommand("rewrite", "Rewrite documents with a privatization mechanism");
  rw_cmd->add_option("--mechanism", rw.mechanism, "privfill, privfill_dp or dp_prompt");
  rw_cmd->add_option("--backend", rw.backend, "stub:<fixture.json> or http://host:port");
  rw_cmd->add_option("--in", rw.in, "Document JSONL")->required();
  rw_cmd->add_option("--out", rw.out, "Rewrite output JSONL")->required();
  rw_cmd->add_option("--manifest", rw.manifest, "Run manifest path (default: <out>.manifest.json)");
  rw_cmd->add_option("--epsilon", rw.epsilon, "Privacy budget per token (DP mechanisms)");
  rw_cmd->add_option("--temperature", rw.temperature, "Sampling temperature");
  rw_cmd->add_option("--sensitivity", rw.sensitivity, "Sensitivity (default 1)");
  rw_cmd->add_option("--logit-min", rw.logit_min, "Lower clipping bound");
  rw_cmd->add_option("--logit-max", rw.logit_max, "Upper clipping bound");
  rw_cmd->add_option("--calibration", rw.calibration, "Calibration report supplying the bounds");
  rw_cmd->add_option("--max-len", rw.max_len, "Prompt length limit in tokens");
  rw_cmd->add_option("--max-new-tokens", rw.max_new_tokens, "Tokens generated per sentence");
  rw_cmd->add_option("--paraphrase-template", rw.paraphrase_template, "dp_prompt template with {text}");
  rw_cmd->add_flag("--force", rw.force, "Replace an existing manifest");

  EvaluateArgs ev;
  auto* ev_cmd = app.add_subcommand("evaluate", "Score rewritten documents");
  ev_cmd->add_option("--kind", ev.kind, "utility, privacy or metrics")
      ->required()
      ->check(CLI::IsMember({"utility", "privacy", "metrics"}));
  ev_cmd->add_option("--originals", ev.originals, "Original document JSONL")->required();
  ev_cmd->add_option("--rewritten", ev.rewritten, "Rewrite output or document JSONL");
  ev_cmd->add_option("--out", ev.out, "Report JSON path")->required();
  ev_cmd->add_option("--dataset", ev.dataset, "Dataset name for the report");
  ev_cmd->add_option("--mechanism", ev.mechanism, "Mechanism name for the report");
  ev_cmd->add_option("--trainer", ev.trainer, "naive-bayes or majority");
  ev_cmd->add_option("--embedder", ev.embedder, "hashed-bow[:dim] or none");
  ev_cmd->add_option("--scorer", ev.scorer, "unigram or none");
  ev_cmd->add_option("--mg-utility", ev.mg_utility, "Utility guessing baseline F1 (percent)");
  ev_cmd->add_option("--mg-privacy", ev.mg_privacy, "Privacy guessing baseline F1 (percent)");
  ev_cmd->add_option("--cosine-csv", ev.cosine_csv, "Write cosine similarity by sentence count");

  ReportArgs rep;
  auto* rep_cmd = app.add_subcommand("report", "Render evaluation reports as tables");
  rep_cmd->add_option("reports", rep.inputs, "Report JSON files")->required();
  rep_cmd->add_option("--csv", rep.csv, "Also write CSV");
  rep_cmd->add_option("--out", rep.out, "Also write the tables to a file");

  InfillArgs inf;
  auto* inf_cmd = app.add_subcommand("infill-data", "Build sentence-infilling training samples");
  inf_cmd->add_option("--source", inf.source, "wiki or crawl")
      ->required()
      ->check(CLI::IsMember({"wiki", "crawl", "wiki_style", "crawl_style"}));
  inf_cmd->add_option("--in", inf.inputs, "Corpus files")->required();
  inf_cmd->add_option("--format", inf.format, "jsonl or text");
  inf_cmd->add_option("--field", inf.field, "JSON field holding the document");
  inf_cmd->add_option("--out", inf.out, "Output directory")->required();
  inf_cmd->add_option("--train-fraction", inf.train_fraction, "Training share (default 0.99)");
  inf_cmd->add_flag("--keep-markup", inf.keep_markup, "Do not strip wiki markup");

  TrainManifestArgs tm;
  auto* tm_cmd = app.add_subcommand("train-manifest", "Emit the fine-tuning parameter manifest");
  tm_cmd->add_option("--set", tm.sets, "key=value override (repeatable)");
  tm_cmd->add_option("--overrides", tm.overrides, "JSON object of overrides");
  tm_cmd->add_option("--out", tm.out, "Output path (default: stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const bool informational = e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success);
    app.exit(e, out, err);
    return informational ? kExitOk : kExitUsage;
  }

  ScopedLogSink sink(err);
  try {
    const ToolkitConfig config = load_config(config_path, env);
    const std::uint64_t seed = first_of(seed_flag, config.seed).value_or(42);
    const int workers = first_of(workers_flag, config.workers).value_or(1);
    if (workers < 1) throw UsageError("--workers must be >= 1");

    if (prep_cmd->parsed()) return prep.source == "enron" ? cmd_prep_enron(prep, out) : cmd_prep_labeled(prep, out);
    if (cal_cmd->parsed()) return cmd_calibrate(cal, config, out);
    if (rw_cmd->parsed()) return cmd_rewrite(rw, config, seed, workers, env, out);
    if (ev_cmd->parsed()) return cmd_evaluate(ev, config, seed, out);
    if (rep_cmd->parsed()) return cmd_report(rep, out);
    if (inf_cmd->parsed()) return cmd_infill_data(inf, seed, out);
    if (tm_cmd->parsed()) return cmd_train_manifest(tm, out);
    throw UsageError("no command given");
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const BackendError& e) {
    err << "backend error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const json::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace privfill
