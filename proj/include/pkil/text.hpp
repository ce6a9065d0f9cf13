#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pkil {

/// A sentence with its character span in the source post.
struct Sentence {
  std::string text;
  std::size_t begin = 0;  // char offset of first character
  std::size_t end = 0;    // one past last character
};

/// A word token with its character span in the source text.
struct Token {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// A contiguous run of 1..window sentences, the unit compared against a
/// question.
struct Fragment {
  std::string text;                    // exact substring of the source post
  std::vector<std::string> tokens;     // lowercased word tokens
  std::size_t first_sentence = 0;      // sentence index range, inclusive
  std::size_t last_sentence = 0;
  std::size_t begin = 0;               // char span into the source post
  std::size_t end = 0;
};

/// Splits a post into sentences. A boundary is a run of '.', '!' or '?'
/// followed by whitespace or end of text; a post with no terminator yields
/// one sentence. Empty input yields an empty list.
std::vector<Sentence> split_sentences(const std::string& post);

/// Lowercases, splits on whitespace and strips leading/trailing punctuation
/// from each token, keeping char spans of the stripped cores. Empty tokens
/// are dropped.
std::vector<Token> tokenize_with_spans(const std::string& text);

/// Token strings only.
std::vector<std::string> tokenize(const std::string& text);

/// All contiguous sentence runs of length 1..window in reading order
/// (by start sentence, then run length). window must be 1, 2 or 3.
std::vector<Fragment> fragments(const std::string& post,
                                std::span<const Sentence> sentences,
                                int window);

/// Convenience: split_sentences + fragments in one call.
std::vector<Fragment> extract_fragments(const std::string& post, int window);

}  // namespace pkil
