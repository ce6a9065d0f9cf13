#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pkil/embeddings.hpp"
#include "pkil/error.hpp"
#include "test_util.hpp"

using namespace pkil;

namespace {

EmbeddingConfig small_config() {
  EmbeddingConfig config;
  config.dim = 16;
  config.epochs = 8;
  config.min_count = 2;
  config.rng_seed = 99;
  return config;
}

std::vector<std::vector<std::string>> contrived_corpus() {
  // "cat" and "dog" always appear in identical contexts.
  std::vector<std::vector<std::string>> corpus;
  const std::vector<std::string> twins = {"cat", "dog"};
  for (int r = 0; r < 60; ++r) {
    for (const std::string& pet : twins) {
      corpus.push_back({"the", pet, "sat", "on", "the", "mat"});
      corpus.push_back({"a", pet, "chased", "the", "ball"});
      corpus.push_back({"my", pet, "slept", "all", "day"});
    }
    corpus.push_back({"rain", "fell", "on", "the", "roof"});
    corpus.push_back({"we", "read", "a", "book", "all", "day"});
  }
  return corpus;
}

double cosine_of(const WordVectors& wv, const std::string& a, const std::string& b) {
  const Eigen::VectorXd& va = wv.table.at(a);
  const Eigen::VectorXd& vb = wv.table.at(b);
  return va.dot(vb) / (va.norm() * vb.norm());
}

WordVectors tiny_vectors() {
  WordVectors wv;
  wv.dim = 2;
  wv.table["gun"] = Eigen::Vector2d(1.0, 0.0);
  wv.table["shot"] = Eigen::Vector2d(0.0, 1.0);
  wv.table["a"] = Eigen::Vector2d(3.0, 4.0);
  wv.max_token_length = 4;
  return wv;
}

}  // namespace

TEST_CASE("train_cbow: same seed gives bitwise-equal vectors") {
  const auto corpus = contrived_corpus();
  const WordVectors first = train_cbow(corpus, small_config());
  const WordVectors second = train_cbow(corpus, small_config());
  REQUIRE(first.size() == second.size());
  for (const auto& [token, vec] : first.table) {
    const Eigen::VectorXd& other = second.table.at(token);
    REQUIRE(vec.size() == other.size());
    for (Eigen::Index i = 0; i < vec.size(); ++i) CHECK(vec[i] == other[i]);
  }

  EmbeddingConfig reseeded = small_config();
  reseeded.rng_seed = 100;
  const WordVectors third = train_cbow(corpus, reseeded);
  bool any_difference = false;
  for (const auto& [token, vec] : first.table) {
    if (vec != third.table.at(token)) any_difference = true;
  }
  CHECK(any_difference);
}

TEST_CASE("train_cbow: tokens below min_count are dropped") {
  auto corpus = contrived_corpus();
  corpus.push_back({"singleton"});
  const WordVectors wv = train_cbow(corpus, small_config());
  CHECK_FALSE(wv.contains("singleton"));
  CHECK(wv.contains("cat"));
}

TEST_CASE("train_cbow: identical contexts draw tokens together") {
  const WordVectors wv = train_cbow(contrived_corpus(), small_config());
  const auto tokens = wv.sorted_tokens();

  std::vector<double> pairwise;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t j = i + 1; j < tokens.size(); ++j) {
      pairwise.push_back(cosine_of(wv, tokens[i], tokens[j]));
    }
  }
  std::sort(pairwise.begin(), pairwise.end());
  const double median = pairwise[pairwise.size() / 2];
  CHECK(cosine_of(wv, "cat", "dog") > median);
}

TEST_CASE("train_cbow: empty corpus and empty vocabulary are errors") {
  CHECK_THROWS_AS((void)train_cbow({}, small_config()), Error);
  const std::vector<std::vector<std::string>> all_rare = {{"one"}, {"two"}, {"three"}};
  CHECK_THROWS_AS((void)train_cbow(all_rare, small_config()), Error);
}

TEST_CASE("load_vectors: basic two-line file") {
  std::istringstream in("a 1.0 0.0\nb 0.0 1.0\n");
  const WordVectors wv = load_vectors(in);
  CHECK(wv.dim == 2);
  CHECK(wv.size() == 2);
  CHECK(wv.table.at("a") == Eigen::Vector2d(1.0, 0.0));
}

TEST_CASE("load_vectors: inconsistent dimension names the line") {
  std::istringstream in("a 1.0 0.0\nb 0.0 1.0 2.0\n");
  CHECK_THROWS_WITH_AS((void)load_vectors(in), doctest::Contains("line 2"), Error);
}

TEST_CASE("load_vectors: empty file is an empty-vocabulary error") {
  std::istringstream in("");
  CHECK_THROWS_WITH_AS((void)load_vectors(in), doctest::Contains("empty"), Error);
}

TEST_CASE("load_vectors: duplicate token rejected") {
  std::istringstream in("a 1.0\na 2.0\n");
  CHECK_THROWS_WITH_AS((void)load_vectors(in), doctest::Contains("duplicate"), Error);
}

TEST_CASE("load_vectors: unparsable number rejected") {
  std::istringstream in("a 1.0 zebra\n");
  CHECK_THROWS_AS((void)load_vectors(in), Error);
}

TEST_CASE("save_vectors/load_vectors round trip is exact") {
  const WordVectors wv = train_cbow(contrived_corpus(), small_config());
  std::ostringstream out;
  save_vectors(wv, out);
  std::istringstream in(out.str());
  const WordVectors back = load_vectors(in);
  REQUIRE(back.size() == wv.size());
  for (const auto& [token, vec] : wv.table) {
    const Eigen::VectorXd& other = back.table.at(token);
    for (Eigen::Index i = 0; i < vec.size(); ++i) CHECK(vec[i] == other[i]);
  }
}

TEST_CASE("lookup: exact, chunked and hopeless tokens") {
  const WordVectors wv = tiny_vectors();
  CHECK(lookup("gun", wv) == Eigen::Vector2d(1.0, 0.0));
  // greedy prefix chunking: gunshot -> gun + shot, averaged
  CHECK(lookup("gunshot", wv) == Eigen::Vector2d(0.5, 0.5));
  CHECK(lookup("zzzz", wv) == Eigen::Vector2d(0.0, 0.0));
  // unmatched letters are skipped, matches still average
  CHECK(lookup("gunzz", wv) == Eigen::Vector2d(1.0, 0.0));
}

TEST_CASE("embed_tokens: hand-computed concatenation") {
  const WordVectors wv = tiny_vectors();
  const std::vector<std::string> tokens = {"a"};
  const FragmentRepresentation rep = embed_tokens(tokens, wv, 2);
  REQUIRE(rep.vector.size() == 4);
  CHECK(rep.norm == 5.0);
  CHECK(rep.vector[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(rep.vector[1] == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(rep.vector[2] == 0.0);
  CHECK(rep.vector[3] == 0.0);
}

TEST_CASE("embed_tokens: all-OOV fragment is the zero vector") {
  const WordVectors wv = tiny_vectors();
  const std::vector<std::string> tokens = {"qqq", "www"};
  const FragmentRepresentation rep = embed_tokens(tokens, wv, 3);
  CHECK(rep.norm == 0.0);
  CHECK(rep.vector.isZero(0.0));
}

TEST_CASE("embed_tokens: tokens beyond M are truncated") {
  const WordVectors wv = tiny_vectors();
  const std::vector<std::string> two = {"gun", "shot"};
  const std::vector<std::string> three = {"gun", "shot", "a"};
  const FragmentRepresentation rep2 = embed_tokens(two, wv, 2);
  const FragmentRepresentation rep3 = embed_tokens(three, wv, 2);
  CHECK(rep2.vector == rep3.vector);
}

TEST_CASE("embed_tokens: unit norm or exactly zero") {
  const WordVectors wv = tiny_vectors();
  const std::vector<std::vector<std::string>> cases = {
      {"gun"}, {"gun", "shot"}, {"a", "gun"}, {"zz"}, {}};
  for (const auto& tokens : cases) {
    const FragmentRepresentation rep = embed_tokens(tokens, wv, 4);
    if (rep.norm == 0.0) {
      CHECK(rep.vector.isZero(0.0));
    } else {
      CHECK(rep.vector.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("embed_tokens: order matters for distinct vectors") {
  const WordVectors wv = tiny_vectors();
  const std::vector<std::string> ab = {"gun", "shot"};
  const std::vector<std::string> ba = {"shot", "gun"};
  CHECK(embed_tokens(ab, wv, 2).vector != embed_tokens(ba, wv, 2).vector);
}
