// Copyright 2026 The Triage Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "triage/text.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

namespace triage {

namespace {

// NLTK English stop-word corpus, 179 entries.
const char* const kStopWords[] = {
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've",
    "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself",
    "she", "she's", "her", "hers", "herself", "it", "it's", "its", "itself", "they", "them",
    "their", "theirs", "themselves", "what", "which", "who", "whom", "this", "that", "that'll",
    "these", "those", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has",
    "had", "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or",
    "because", "as", "until", "while", "of", "at", "by", "for", "with", "about", "against",
    "between", "into", "through", "during", "before", "after", "above", "below", "to", "from",
    "up", "down", "in", "out", "on", "off", "over", "under", "again", "further", "then", "once",
    "here", "there", "when", "where", "why", "how", "all", "any", "both", "each", "few", "more",
    "most", "other", "some", "such", "no", "nor", "not", "only", "own", "same", "so", "than",
    "too", "very", "s", "t", "can", "will", "just", "don", "don't", "should", "should've", "now",
    "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't", "didn",
    "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't", "isn",
    "isn't", "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan",
    "shan't", "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't",
    "wouldn", "wouldn't",
};

bool is_ascii_punct_or_digit(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 33 && c <= 47) || (c >= 58 && c <= 64) ||
         (c >= 91 && c <= 96) || (c >= 123 && c <= 126);
}

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

}  // namespace

const std::vector<std::string>& stop_words() {
  static const std::vector<std::string> words(std::begin(kStopWords), std::end(kStopWords));
  return words;
}

bool is_stop_word(std::string_view word) {
  static const std::unordered_set<std::string_view> set(std::begin(kStopWords), std::end(kStopWords));
  return set.count(word) > 0;
}

std::string strip_html_tags(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '<') {
      // A tag starts with a letter, '/', '!' or '?'; a bare '<' (as in
      // "a < b") is kept.
      const std::size_t close = text.find('>', i + 1);
      const bool tag_like = i + 1 < text.size() &&
                            (std::isalpha(static_cast<unsigned char>(text[i + 1])) ||
                             text[i + 1] == '/' || text[i + 1] == '!' || text[i + 1] == '?');
      if (tag_like && close != std::string_view::npos) {
        i = close + 1;
        continue;
      }
    }
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

std::string clean_for_embedding(std::string_view text) { return strip_html_tags(text); }

std::vector<std::string> clean_for_bow(std::string_view text) {
  std::string s = strip_html_tags(text);
  for (char& ch : s) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 'A' && c <= 'Z') {
      ch = static_cast<char>(c - 'A' + 'a');
    }
  }
  // Digits and punctuation split a whitespace token into pieces; "don't"
  // becomes "don" and "t", both of which are in the stop list.
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&]() {
    if (current.empty()) return;
    std::string stripped;
    stripped.reserve(current.size());
    for (char ch : current) {
      if (is_ascii_punct_or_digit(static_cast<unsigned char>(ch))) {
        if (!stripped.empty() && !is_stop_word(stripped)) tokens.push_back(stripped);
        stripped.clear();
      } else {
        stripped.push_back(ch);
      }
    }
    if (!stripped.empty() && !is_stop_word(stripped)) tokens.push_back(stripped);
    current.clear();
  };
  for (char ch : s) {
    if (is_space(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      current.push_back(ch);
    }
  }
  flush();
  return tokens;
}

}  // namespace triage
