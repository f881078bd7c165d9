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

#include "privfill/stub_model.hpp"

#include <fstream>

#include "privfill/errors.hpp"
#include "privfill/text.hpp"

namespace privfill {

StubModel StubModel::from_json(const nlohmann::json& fixture) {
  StubModel model;
  try {
    model.id_ = fixture.value("id", std::string("stub"));
    for (const auto& word : fixture.at("vocab")) {
      const auto w = word.get<std::string>();
      if (model.index_.count(w)) throw DataError("stub fixture: duplicate vocabulary entry '" + w + "'");
      model.index_.emplace(w, static_cast<TokenId>(model.vocab_.size()));
      model.vocab_.push_back(w);
    }
    auto ensure = [&model](const std::string& w) {
      auto it = model.index_.find(w);
      if (it != model.index_.end()) return it->second;
      const auto id = static_cast<TokenId>(model.vocab_.size());
      model.index_.emplace(w, id);
      model.vocab_.push_back(w);
      return id;
    };
    const auto eos = fixture.at("eos").get<std::string>();
    if (!model.index_.count(eos)) throw DataError("stub fixture: eos token '" + eos + "' not in vocab");
    model.eos_ = model.index_.at(eos);
    model.unk_ = ensure(fixture.value("unk", std::string("<unk>")));
    ensure(std::string(kBlankToken));
    model.high_ = fixture.value("logit_high", 8.0);
    model.low_ = fixture.value("logit_low", -95.0);
    if (!(model.low_ < model.high_)) throw DataError("stub fixture: logit_low must be below logit_high");

    const auto n = static_cast<Eigen::Index>(model.vocab_.size());
    for (const auto& r : fixture.at("rules")) {
      Rule rule;
      rule.pattern = r.at("pattern").get<std::string>();
      rule.regex = std::regex(rule.pattern, std::regex::ECMAScript);
      if (r.contains("emit")) {
        rule.scripted = true;
        for (const auto& w : r.at("emit")) {
          const auto word = w.get<std::string>();
          if (!model.index_.count(word)) throw DataError("stub fixture: emitted token '" + word + "' not in vocab");
          rule.emit.push_back(model.index_.at(word));
        }
      } else {
        for (const auto& row : r.at("logits")) {
          const auto values = row.get<std::vector<double>>();
          if (static_cast<Eigen::Index>(values.size()) > n) {
            throw DataError("stub fixture: logit row longer than the vocabulary");
          }
          Eigen::VectorXd v = Eigen::VectorXd::Constant(n, model.low_);
          for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
          rule.logits.push_back(std::move(v));
        }
        if (rule.logits.empty()) throw DataError("stub fixture: rule '" + rule.pattern + "' has no logits");
        const auto exhausted = r.value("exhausted", std::string("repeat"));
        if (exhausted != "repeat" && exhausted != "eos") {
          throw DataError("stub fixture: 'exhausted' must be \"repeat\" or \"eos\"");
        }
        rule.repeat_last = exhausted == "repeat";
      }
      model.rules_.push_back(std::move(rule));
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("stub fixture: ") + e.what());
  } catch (const std::regex_error& e) {
    throw DataError(std::string("stub fixture: bad pattern: ") + e.what());
  }
  if (model.rules_.empty()) throw DataError("stub fixture: no rules");
  return model;
}

StubModel StubModel::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BackendError("cannot open stub fixture " + path);
  nlohmann::json fixture;
  try {
    fixture = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("stub fixture " + path + ": " + e.what());
  }
  return from_json(fixture);
}

TokenId StubModel::token_id(std::string_view word) const {
  auto it = index_.find(std::string(word));
  return it == index_.end() ? unk_ : it->second;
}

TokenSequence StubModel::tokenize(std::string_view text) {
  TokenSequence out;
  for (const auto& word : split_whitespace(text)) out.push_back(token_id(word));
  return out;
}

Eigen::VectorXd StubModel::one_hot(TokenId hot) const {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(vocab_.size()), low_);
  v[hot] = high_;
  return v;
}

Eigen::VectorXd StubModel::next_logits(const DecodingState& state) {
  const std::string prompt(state.prompt_text);
  for (const auto& rule : rules_) {
    if (!std::regex_search(prompt, rule.regex)) continue;
    const std::size_t step = state.generated.size();
    if (rule.scripted) return one_hot(step < rule.emit.size() ? rule.emit[step] : eos_);
    if (step < rule.logits.size()) return rule.logits[step];
    return rule.repeat_last ? rule.logits.back() : one_hot(eos_);
  }
  throw BackendError("stub model " + id_ + ": no rule matches prompt");
}

std::string StubModel::decode(std::span<const TokenId> tokens) {
  std::vector<std::string> words;
  for (TokenId t : tokens) {
    if (t == eos_) continue;
    if (t < 0 || static_cast<std::size_t>(t) >= vocab_.size()) throw BackendError("stub model: token id out of range");
    words.push_back(vocab_[static_cast<std::size_t>(t)]);
  }
  return join(words, " ");
}

}  // namespace privfill
