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

#include "privfill/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace privfill {
namespace {

// A period after these never ends a sentence.
constexpr std::array<std::string_view, 24> kTitles = {
    "mr", "mrs", "ms",  "dr",  "prof", "st", "sen",    "rep",  "gov", "gen", "capt", "lt",
    "col", "sgt", "rev", "hon", "mt",  "ft", "vs",     "cf",   "fig", "approx", "dept", "e.g"};

// A period after these ends a sentence only before a capitalised word.
constexpr std::array<std::string_view, 20> kConditional = {
    "etc", "inc", "ltd", "corp", "co",  "jr",  "sr",  "bros", "jan", "feb",
    "mar", "apr", "jun", "jul",  "aug", "sep", "sept", "oct", "nov", "dec"};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& list, std::string_view word) {
  return std::find(list.begin(), list.end(), word) != list.end();
}

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

// Length of a closing quote or bracket starting at text[i], 0 if none.
std::size_t closer_length(std::string_view text, std::size_t i) {
  const char c = text[i];
  if (c == '"' || c == '\'' || c == ')' || c == ']') return 1;
  // U+2019 and U+201D.
  if (text.substr(i, 3) == "\xE2\x80\x99" || text.substr(i, 3) == "\xE2\x80\x9D") return 3;
  return 0;
}

bool is_opener(char c) { return c == '(' || c == '"' || c == '\'' || c == '['; }

// "U.S", "a.m": dot-separated runs of one or two letters.
bool is_dotted_acronym(std::string_view word) {
  if (word.find('.') == std::string_view::npos) return false;
  std::size_t run = 0;
  for (char c : word) {
    if (c == '.') {
      if (run == 0) return false;
      run = 0;
    } else if (std::isalpha(static_cast<unsigned char>(c))) {
      if (++run > 2) return false;
    } else {
      return false;
    }
  }
  return run > 0;
}

// Word ending just before position `dot`, lower-cased, leading openers removed.
std::string word_before(std::string_view text, std::size_t dot) {
  std::size_t b = dot;
  while (b > 0 && !is_space(text[b - 1])) --b;
  while (b < dot && is_opener(text[b])) ++b;
  return to_lower_ascii(text.substr(b, dot - b));
}

bool next_word_capitalised(std::string_view text, std::size_t from) {
  while (from < text.size() && is_space(text[from])) ++from;
  while (from < text.size() && is_opener(text[from])) ++from;
  return from < text.size() && std::isupper(static_cast<unsigned char>(text[from]));
}

// True if position i (a '\n') starts a blank line.
bool starts_blank_line(std::string_view text, std::size_t i) {
  for (std::size_t j = i + 1; j < text.size(); ++j) {
    if (text[j] == '\n') return true;
    if (!is_space(text[j])) return false;
  }
  return false;
}

void push_trimmed(std::string_view text, std::size_t begin, std::size_t end, std::vector<SentenceSpan>& out) {
  while (begin < end && is_space(text[begin])) ++begin;
  while (end > begin && is_space(text[end - 1])) --end;
  if (begin < end) out.push_back({begin, end});
}

}  // namespace

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && is_space(text[b])) ++b;
  while (e > b && is_space(text[e - 1])) --e;
  return text.substr(b, e - b);
}

bool is_blank(std::string_view text) { return trim(text).empty(); }

std::vector<SentenceSpan> segment_sentences(std::string_view text) {
  std::vector<SentenceSpan> spans;
  std::size_t start = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '\n' && starts_blank_line(text, i)) {
      push_trimmed(text, start, i, spans);
      while (i < text.size() && is_space(text[i])) ++i;
      start = i;
      continue;
    }
    if (!is_terminator(c)) {
      ++i;
      continue;
    }

    std::size_t run_end = i;
    while (run_end < text.size() && is_terminator(text[run_end])) ++run_end;
    std::size_t k = run_end;
    while (k < text.size()) {
      const std::size_t len = closer_length(text, k);
      if (len == 0) break;
      k += len;
    }
    if (k < text.size() && !is_space(text[k])) {
      i = k;
      continue;
    }

    const std::string_view run = text.substr(i, run_end - i);
    bool split = true;
    if (run.size() >= 2 && run.find_first_not_of('.') == std::string_view::npos) {
      split = false;  // ellipsis
    } else if (run == ".") {
      const std::string word = word_before(text, i);
      if (contains(kTitles, word) || word == "i.e") {
        split = false;
      } else if (contains(kConditional, word) || is_dotted_acronym(word)) {
        split = k == text.size() || next_word_capitalised(text, k);
      }
    }

    if (split) {
      push_trimmed(text, start, k, spans);
      start = k;
    }
    i = k;
  }
  push_trimmed(text, start, text.size(), spans);
  return spans;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& span : segment_sentences(text)) out.emplace_back(span.in(text));
  return out;
}

std::string join(std::span<const std::string> parts, std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += separator;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string replace_all(std::string_view text, std::string_view from, std::string_view to) {
  if (from.empty()) return std::string(text);
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t hit = text.find(from, pos);
    if (hit == std::string_view::npos) break;
    out.append(text.substr(pos, hit - pos));
    out.append(to);
    pos = hit + from.size();
  }
  out.append(text.substr(pos));
  return out;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t count = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++count;
  }
  return count;
}

}  // namespace privfill
