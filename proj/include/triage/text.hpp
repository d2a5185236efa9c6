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

#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace triage {

enum class CleanMode {
  // HTML tags removed, nothing else; input for sentence-embedding models.
  embedding_clean,
  // Tags removed, lowercased, digits and punctuation stripped, stop words
  // removed, split on whitespace; input for TF-IDF and Word2Vec.
  bow_clean,
};

std::string strip_html_tags(std::string_view text);

std::string clean_for_embedding(std::string_view text);
std::vector<std::string> clean_for_bow(std::string_view text);

// Identifier of the shipped stop-word list. Bump when the list changes.
inline constexpr std::string_view kStopWordListVersion = "nltk-english-179";
const std::vector<std::string>& stop_words();
bool is_stop_word(std::string_view word);

}  // namespace triage
