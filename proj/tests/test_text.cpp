#include <doctest.h>

#include <random>

#include "pkil/error.hpp"
#include "pkil/text.hpp"

using namespace pkil;

TEST_CASE("split_sentences: two terminated sentences") {
  const auto s = split_sentences("I am tired. I am done.");
  REQUIRE(s.size() == 2);
  CHECK(s[0].text == "I am tired.");
  CHECK(s[1].text == "I am done.");
}

TEST_CASE("split_sentences: no terminator yields one sentence") {
  const auto s = split_sentences("no punctuation here");
  REQUIRE(s.size() == 1);
  CHECK(s[0].text == "no punctuation here");
}

TEST_CASE("split_sentences: terminator runs close one sentence") {
  const auto s = split_sentences("Really?! Yes.");
  REQUIRE(s.size() == 2);
  CHECK(s[0].text == "Really?!");
  CHECK(s[1].text == "Yes.");
}

TEST_CASE("split_sentences: empty post") {
  CHECK(split_sentences("").empty());
  CHECK(split_sentences("   \n ").empty());
}

TEST_CASE("split_sentences: terminator inside a token is no boundary") {
  const auto s = split_sentences("version 1.2 shipped. done");
  REQUIRE(s.size() == 2);
  CHECK(s[0].text == "version 1.2 shipped.");
}

TEST_CASE("tokenize basics") {
  CHECK(tokenize("I do have a gun.") ==
        std::vector<std::string>{"i", "do", "have", "a", "gun"});
  CHECK(tokenize("Tired of being Tired") ==
        std::vector<std::string>{"tired", "of", "being", "tired"});
  CHECK(tokenize("...").empty());
}

TEST_CASE("tokenize keeps inner punctuation, strips outer") {
  CHECK(tokenize("don't (stop)!") == std::vector<std::string>{"don't", "stop"});
}

TEST_CASE("tokenize is idempotent on its own output") {
  std::mt19937 rng(7);
  const std::vector<std::string> posts = {
      "I am tired. Really?! No-one knows... don't ask; fine.",
      "A 1.2 b!! C? (d) e.g. okay",
      "MIXED Case, And SOME. punCt!",
  };
  for (const auto& post : posts) {
    const auto once = tokenize(post);
    std::string joined;
    for (const auto& t : once) {
      if (!joined.empty()) joined += ' ';
      joined += t;
    }
    CHECK(tokenize(joined) == once);
  }
}

TEST_CASE("fragments: counts for window 2") {
  const std::string post = "One here. Two here. Three here.";
  const auto sentences = split_sentences(post);
  REQUIRE(sentences.size() == 3);
  CHECK(fragments(post, sentences, 2).size() == 5);  // n + (n-1)

  const std::string one = "Only one.";
  CHECK(fragments(one, split_sentences(one), 2).size() == 1);
  CHECK(fragments("", split_sentences(""), 2).empty());
}

TEST_CASE("fragments: window 1 gives exactly the sentences") {
  const std::string post = "A b. C d! E?";
  const auto sentences = split_sentences(post);
  const auto frags = fragments(post, sentences, 1);
  REQUIRE(frags.size() == sentences.size());
  for (std::size_t i = 0; i < frags.size(); ++i) {
    CHECK(frags[i].text == sentences[i].text);
    CHECK(frags[i].first_sentence == i);
    CHECK(frags[i].last_sentence == i);
  }
}

TEST_CASE("fragments: out-of-range window rejected") {
  const std::string post = "A.";
  const auto sentences = split_sentences(post);
  CHECK_THROWS_AS((void)fragments(post, sentences, 0), Error);
  CHECK_THROWS_AS((void)fragments(post, sentences, 4), Error);
}

TEST_CASE("fragments: char spans reconstruct the text") {
  const std::string post = "  First one here. Second bit!   Third thing? tail no dot";
  for (int window : {1, 2, 3}) {
    for (const Fragment& f : extract_fragments(post, window)) {
      CHECK(f.text == post.substr(f.begin, f.end - f.begin));
      CHECK(f.end <= post.size());
      CHECK(f.begin < f.end);
      CHECK(f.last_sentence - f.first_sentence + 1 <= static_cast<std::size_t>(window));
    }
  }
}
