#include "pkil/text.hpp"

#include <cctype>

#include "pkil/error.hpp"

namespace pkil {

namespace {

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

bool is_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

std::vector<Sentence> split_sentences(const std::string& post) {
  std::vector<Sentence> out;
  const std::size_t n = post.size();
  std::size_t i = 0;
  while (i < n) {
    while (i < n && is_space(post[i])) ++i;
    if (i >= n) break;
    const std::size_t begin = i;
    std::size_t end = n;
    for (std::size_t j = i; j < n; ++j) {
      if (!is_terminator(post[j])) continue;
      std::size_t k = j;
      while (k + 1 < n && is_terminator(post[k + 1])) ++k;  // merge "?!" runs
      if (k + 1 >= n || is_space(post[k + 1])) {
        end = k + 1;
        break;
      }
      j = k;
    }
    out.push_back({post.substr(begin, end - begin), begin, end});
    i = end;
  }
  return out;
}

std::vector<Token> tokenize_with_spans(const std::string& text) {
  std::vector<Token> out;
  const std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    while (i < n && is_space(text[i])) ++i;
    if (i >= n) break;
    std::size_t j = i;
    while (j < n && !is_space(text[j])) ++j;
    // strip leading/trailing punctuation from the raw [i, j) word
    std::size_t b = i;
    std::size_t e = j;
    while (b < e && is_punct(text[b])) ++b;
    while (e > b && is_punct(text[e - 1])) --e;
    if (b < e) {
      std::string tok = text.substr(b, e - b);
      for (char& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      out.push_back({std::move(tok), b, e});
    }
    i = j;
  }
  return out;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  for (auto& t : tokenize_with_spans(text)) out.push_back(std::move(t.text));
  return out;
}

std::vector<Fragment> fragments(const std::string& post,
                                std::span<const Sentence> sentences,
                                int window) {
  if (window < 1 || window > 3) {
    throw Error("fragment window must be 1, 2 or 3; got " + std::to_string(window));
  }
  std::vector<Fragment> out;
  const std::size_t n = sentences.size();
  for (std::size_t start = 0; start < n; ++start) {
    for (std::size_t len = 1; len <= static_cast<std::size_t>(window) && start + len <= n; ++len) {
      const Sentence& first = sentences[start];
      const Sentence& last = sentences[start + len - 1];
      Fragment f;
      f.begin = first.begin;
      f.end = last.end;
      f.text = post.substr(f.begin, f.end - f.begin);
      f.tokens = tokenize(f.text);
      f.first_sentence = start;
      f.last_sentence = start + len - 1;
      out.push_back(std::move(f));
    }
  }
  return out;
}

std::vector<Fragment> extract_fragments(const std::string& post, int window) {
  const auto sentences = split_sentences(post);
  return fragments(post, sentences, window);
}

}  // namespace pkil
