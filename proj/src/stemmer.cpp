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

#include "privfill/stemmer.hpp"

#include <array>
#include <utility>

namespace privfill {
namespace {

using Rule = std::pair<std::string_view, std::string_view>;

class PorterWord {
 public:
  explicit PorterWord(std::string_view word) : w_(word) {}

  std::string take() && { return std::move(w_); }

  void step1a() {
    if (ends("sses")) replace_suffix(4, "ss");
    else if (ends("ies")) replace_suffix(3, "i");
    else if (ends("ss")) return;
    else if (ends("s")) replace_suffix(1, "");
  }

  void step1b() {
    if (ends("eed")) {
      if (measure(w_.size() - 3) > 0) replace_suffix(3, "ee");
      return;
    }
    bool stripped = false;
    if (ends("ed") && has_vowel(w_.size() - 2)) {
      replace_suffix(2, "");
      stripped = true;
    } else if (ends("ing") && has_vowel(w_.size() - 3)) {
      replace_suffix(3, "");
      stripped = true;
    }
    if (!stripped) return;

    if (ends("at")) replace_suffix(2, "ate");
    else if (ends("bl")) replace_suffix(2, "ble");
    else if (ends("iz")) replace_suffix(2, "ize");
    else if (double_consonant(w_.size())) {
      const char last = w_.back();
      if (last != 'l' && last != 's' && last != 'z') w_.pop_back();
    } else if (measure(w_.size()) == 1 && cvc(w_.size())) {
      w_ += 'e';
    }
  }

  void step1c() {
    if (ends("y") && has_vowel(w_.size() - 1)) w_.back() = 'i';
  }

  void step2() {
    static constexpr std::array<Rule, 20> kRules = {{
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},   {"anci", "ance"},
        {"izer", "ize"},    {"abli", "able"},   {"alli", "al"},     {"entli", "ent"},
        {"eli", "e"},       {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"}, {"fulness", "ful"},
        {"ousness", "ous"}, {"aliti", "al"},    {"iviti", "ive"},   {"biliti", "ble"},
    }};
    apply_longest(kRules, 0);
  }

  void step3() {
    static constexpr std::array<Rule, 7> kRules = {{
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"},  {"ful", ""},   {"ness", ""},
    }};
    apply_longest(kRules, 0);
  }

  void step4() {
    static constexpr std::array<std::string_view, 19> kSuffixes = {
        "al",  "ance", "ence", "er",  "ic",  "able", "ible", "ant", "ement", "ment",
        "ent", "ion",  "ou",   "ism", "ate", "iti",  "ous",  "ive", "ize"};
    std::string_view best;
    for (auto s : kSuffixes) {
      if (ends(s) && s.size() > best.size()) best = s;
    }
    if (best.empty()) return;
    const std::size_t stem = w_.size() - best.size();
    if (measure(stem) <= 1) return;
    if (best == "ion" && (stem == 0 || (w_[stem - 1] != 's' && w_[stem - 1] != 't'))) return;
    w_.resize(stem);
  }

  void step5() {
    if (ends("e")) {
      const std::size_t stem = w_.size() - 1;
      const int m = measure(stem);
      if (m > 1 || (m == 1 && !cvc(stem))) w_.pop_back();
    }
    if (w_.size() >= 2 && w_.back() == 'l' && double_consonant(w_.size()) && measure(w_.size()) > 1) {
      w_.pop_back();
    }
  }

 private:
  bool consonant(std::size_t i) const {
    switch (w_[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 || !consonant(i - 1);
      default:
        return true;
    }
  }

  // Number of VC sequences in w_[0, len).
  int measure(std::size_t len) const {
    int m = 0;
    std::size_t i = 0;
    while (i < len && consonant(i)) ++i;
    while (i < len) {
      while (i < len && !consonant(i)) ++i;
      if (i >= len) break;
      while (i < len && consonant(i)) ++i;
      ++m;
    }
    return m;
  }

  bool has_vowel(std::size_t len) const {
    for (std::size_t i = 0; i < len; ++i) {
      if (!consonant(i)) return true;
    }
    return false;
  }

  // w_[len-2] == w_[len-1] and both consonants.
  bool double_consonant(std::size_t len) const {
    return len >= 2 && w_[len - 1] == w_[len - 2] && consonant(len - 1);
  }

  // w_[0, len) ends consonant-vowel-consonant, the last not w, x or y.
  bool cvc(std::size_t len) const {
    if (len < 3) return false;
    if (!consonant(len - 1) || consonant(len - 2) || !consonant(len - 3)) return false;
    const char c = w_[len - 1];
    return c != 'w' && c != 'x' && c != 'y';
  }

  bool ends(std::string_view suffix) const {
    return w_.size() >= suffix.size() &&
           std::string_view(w_).substr(w_.size() - suffix.size()) == suffix;
  }

  void replace_suffix(std::size_t len, std::string_view with) {
    w_.resize(w_.size() - len);
    w_ += with;
  }

  // The longest matching suffix is chosen; if its stem fails the measure
  // condition no shorter suffix is tried.
  template <std::size_t N>
  void apply_longest(const std::array<Rule, N>& rules, int min_measure_exclusive) {
    const Rule* best = nullptr;
    for (const auto& rule : rules) {
      if (ends(rule.first) && (best == nullptr || rule.first.size() > best->first.size())) best = &rule;
    }
    if (best == nullptr) return;
    if (measure(w_.size() - best->first.size()) > min_measure_exclusive) {
      replace_suffix(best->first.size(), best->second);
    }
  }

  std::string w_;
};

}  // namespace

std::string porter_stem(std::string_view word) {
  if (word.size() <= 2) return std::string(word);
  PorterWord w(word);
  w.step1a();
  w.step1b();
  w.step1c();
  w.step2();
  w.step3();
  w.step4();
  w.step5();
  return std::move(w).take();
}

}  // namespace privfill
