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

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "triage/embeddings.hpp"
#include "triage/errors.hpp"
#include "triage/text.hpp"
#include "triage/tfidf.hpp"
#include "triage/word2vec.hpp"

namespace triage {
namespace {

TEST(TextCleaning, StripsTagsButKeepsComparisons) {
  EXPECT_EQ(strip_html_tags("<p>Hello <b>world</b></p>"), "Hello world");
  EXPECT_EQ(strip_html_tags("a < b and c > d"), "a < b and c > d");
  EXPECT_EQ(clean_for_embedding("<div>Keep Case, 42!</div>"), "Keep Case, 42!");
}

TEST(TextCleaning, BagOfWordsLowercasesAndDropsStopWordsDigitsPunctuation) {
  const auto tokens = clean_for_bow("<p>The FIFO overflowed in block42; don't retry!</p>");
  const std::vector<std::string> expected = {"fifo", "overflowed", "block", "retry"};
  EXPECT_EQ(tokens, expected);
  EXPECT_EQ(stop_words().size(), 179u);
  EXPECT_TRUE(is_stop_word("the"));
  EXPECT_FALSE(is_stop_word("fifo"));
}

// Documents {a b b}, {a c}, {c c c d}. With N = 3, idf(df = 2) = ln(4/3) + 1
// and idf(df = 1) = ln 2 + 1; tf is the count over the document length.
TEST(Tfidf, ThreeDocumentTableMatchesHandComputation) {
  const std::vector<TokenList> docs = {{"a", "b", "b"}, {"a", "c"}, {"c", "c", "c", "d"}};
  const auto m = tfidf_fit(docs, 10);
  const std::vector<std::string> vocab = {"b", "c", "a", "d"};  // by maximum tf-idf
  EXPECT_EQ(m.vocabulary(), vocab);
  EXPECT_NEAR(smoothed_idf(3, 2), 1.2876820724517808, 1e-12);
  EXPECT_NEAR(smoothed_idf(3, 1), 1.6931471805599454, 1e-12);

  const Matrix t = tfidf_transform_batch(m, docs);
  const double expected[3][4] = {
      {1.1287647870399635, 0.0, 0.42922735748392693, 0.0},
      {0.0, 0.6438410362258904, 0.6438410362258904, 0.0},
      {0.0, 0.9657615543388356, 0.0, 0.42328679513998635},
  };
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 4; ++c) EXPECT_NEAR(t(r, c), expected[r][c], 1e-9) << r << "," << c;
  }
}

TEST(Tfidf, TopKKeepsHighestRankedTermsWithLexicographicTies) {
  const std::vector<TokenList> docs = {{"a", "b", "b"}, {"a", "c"}, {"c", "c", "c", "d"}};
  EXPECT_EQ(tfidf_fit(docs, 2).vocabulary(), (std::vector<std::string>{"b", "c"}));
  const std::vector<TokenList> tied = {{"zeta", "alpha", "mid"}, {"other"}};
  // "other" scores 1 * idf; the three tied terms score idf / 3 each.
  EXPECT_EQ(tfidf_fit(tied, 2).vocabulary(), (std::vector<std::string>{"other", "alpha"}));
  EXPECT_EQ(tfidf_fit(tied, 3).vocabulary(), (std::vector<std::string>{"other", "alpha", "mid"}));
}

TEST(Tfidf, EmptyOrUnknownDocumentsGiveZeros) {
  const auto m = tfidf_fit({{"x", "y"}, {"y"}}, 5);
  EXPECT_EQ(tfidf_transform(m, {}), std::vector<double>(m.width(), 0.0));
  EXPECT_EQ(tfidf_transform(m, {"unknown"}), std::vector<double>(m.width(), 0.0));
  EXPECT_THROW(tfidf_fit({{}, {}}, 5), std::invalid_argument);
}

TEST(Tfidf, RarerTermGetsHigherIdfWhileNotInEveryDocument) {
  for (std::size_t df = 1; df + 1 < 20; ++df) EXPECT_GT(smoothed_idf(20, df), smoothed_idf(20, df + 1));
}

TEST(Tfidf, SerialAndParallelBatchesAgreeAndJsonRoundTrips) {
  std::vector<TokenList> docs;
  for (int i = 0; i < 200; ++i) docs.push_back({"w" + std::to_string(i % 17), "w" + std::to_string(i % 5), "common"});
  const auto m = tfidf_fit(docs, 8);
  EXPECT_EQ(tfidf_transform_batch(m, docs, Execution::serial), tfidf_transform_batch(m, docs, Execution::parallel));
  EXPECT_EQ(TfidfModel::from_json(m.to_json()), m);
}

TEST(Word2Vec, DeterministicPerSeedAndSeparatesContexts) {
  std::vector<TokenList> docs;
  for (int i = 0; i < 300; ++i) {
    docs.push_back({"cpu", "core", "cache", "cpu", "core"});
    docs.push_back({"disk", "sector", "raid", "disk", "sector"});
  }
  for (auto variant : {Word2VecVariant::cbow, Word2VecVariant::skipgram}) {
    Word2VecParams p;
    p.variant = variant;
    p.dim = 16;
    p.window = 2;
    p.epochs = 5;
    p.seed = 4;
    const auto a = word2vec_train(docs, p);
    const auto b = word2vec_train(docs, p);
    EXPECT_EQ(a, b);
    EXPECT_GT(cosine_similarity(a.vector_of("cpu"), a.vector_of("core")),
              cosine_similarity(a.vector_of("cpu"), a.vector_of("raid")));
    EXPECT_TRUE(a.vector_of("missing").empty());
    EXPECT_EQ(embed_average(a, {"missing"}), std::vector<double>(16, 0.0));
    EXPECT_EQ(WordEmbeddingModel::from_json(a.to_json()), a);
  }
  EXPECT_THROW(word2vec_train({}, Word2VecParams{}), std::invalid_argument);
}

TEST(ExternalEmbeddings, LoadsLookupsAndRejectsRaggedRows) {
  std::istringstream good(R"({"key":"1:1","vec":[1,2]}
{"key":"1:2","vec":[3,4]})");
  const auto store = ExternalEmbeddingStore::load(good);
  EXPECT_EQ(store.dim(), 2u);
  EXPECT_EQ(store.lookup(embedding_key("1", 2)), (std::vector<double>{3, 4}));
  try {
    store.lookup("9:9");
    FAIL() << "expected MissingEmbeddingError";
  } catch (const MissingEmbeddingError& e) {
    EXPECT_EQ(e.key(), "9:9");
  }
  std::istringstream ragged(R"({"key":"a","vec":[1,2]}
{"key":"b","vec":[1]})");
  EXPECT_THROW(ExternalEmbeddingStore::load(ragged), SchemaError);
  std::istringstream dup(R"({"key":"a","vec":[1]}
{"key":"a","vec":[2]})");
  EXPECT_THROW(ExternalEmbeddingStore::load(dup), SchemaError);
}

}  // namespace
}  // namespace triage
