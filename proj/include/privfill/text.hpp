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

#ifndef PRIVFILL_TEXT_HPP_
#define PRIVFILL_TEXT_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace privfill {

// Byte range [begin, end) of one sentence, without surrounding whitespace.
struct SentenceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  std::string_view in(std::string_view text) const { return text.substr(begin, end - begin); }
  bool operator==(const SentenceSpan&) const = default;
};

// Rule-based sentence boundary detection.
//
// A boundary follows a run of '.', '!' or '?' (plus closing quotes and
// brackets) that is followed by whitespace, and every blank line. A period
// after a title such as "Dr." or "Mr." never ends a sentence; after "etc.",
// "Inc." or dotted acronyms ("U.S.") it does only when the next word is
// capitalised. An ellipsis never ends a sentence. Single letters ("A.") are ordinary words.
//
// Spans are ordered, non-overlapping and together cover every non-whitespace
// byte. Text without any boundary yields one span; blank text yields none.
std::vector<SentenceSpan> segment_sentences(std::string_view text);

// Convenience: the span contents as strings.
std::vector<std::string> split_sentences(std::string_view text);

bool is_space(char c);
std::string_view trim(std::string_view text);
bool is_blank(std::string_view text);

std::string join(std::span<const std::string> parts, std::string_view separator);

// Whitespace-separated words.
std::vector<std::string> split_whitespace(std::string_view text);

std::string to_lower_ascii(std::string_view text);

// Replaces every occurrence of `from` with `to`.
std::string replace_all(std::string_view text, std::string_view from, std::string_view to);

// Number of non-overlapping occurrences of needle in haystack.
std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

}  // namespace privfill

#endif  // PRIVFILL_TEXT_HPP_
