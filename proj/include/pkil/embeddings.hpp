#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pkil/text.hpp"

namespace pkil {

/// Hyperparameters for CBOW training and fragment representation.
struct EmbeddingConfig {
  int dim = 50;
  int window = 5;
  int negative_samples = 5;
  int epochs = 15;
  double learning_rate = 0.05;
  int min_count = 2;
  int max_tokens = 30;  // M: tokens per fragment before truncation
  std::uint64_t rng_seed = 42;
};

void validate(const EmbeddingConfig& config);

/// A token -> vector table. Immutable after training or loading.
struct WordVectors {
  int dim = 0;
  std::unordered_map<std::string, Eigen::VectorXd> table;
  std::size_t max_token_length = 0;  // longest key, bounds the prefix scan

  bool contains(const std::string& token) const { return table.count(token) != 0; }
  std::size_t size() const { return table.size(); }
  /// Tokens in sorted order (serialization and deterministic iteration).
  std::vector<std::string> sorted_tokens() const;
};

/// Unit-normalized concatenation of the fragment's first M token vectors,
/// zero-padded to length M*dim. norm keeps the pre-normalization length;
/// an all-zero concatenation stays zero with norm 0.
struct FragmentRepresentation {
  Eigen::VectorXd vector;
  double norm = 0.0;
};

/// Trains CBOW word vectors with negative sampling. Single-threaded and
/// bit-reproducible for a fixed config.rng_seed. Tokens below min_count are
/// dropped from the vocabulary and the training stream.
WordVectors train_cbow(std::span<const std::vector<std::string>> corpus,
                       const EmbeddingConfig& config);

/// Reads the word-vector text format: one token per line followed by dim
/// whitespace-separated floats, UTF-8, no header. Throws on inconsistent
/// dimensions, duplicate tokens, unparsable numbers and empty vocabularies,
/// naming the offending line.
WordVectors load_vectors(std::istream& in);
WordVectors load_vectors_file(const std::string& path);

/// Writes the same format with round-trip-exact float formatting, tokens in
/// sorted order.
void save_vectors(const WordVectors& vectors, std::ostream& out);
void save_vectors_file(const WordVectors& vectors, const std::string& path);

/// Vector for a token. Exact matches return the stored vector. For
/// out-of-vocabulary tokens the string is scanned left to right taking the
/// longest vocabulary word that prefixes the remainder (advancing one letter
/// when none does) and the matched vectors are averaged; tokens with no
/// match at all map to the zero vector.
Eigen::VectorXd lookup(const std::string& token, const WordVectors& vectors);

/// Builds the representation of a token sequence (tokens beyond max_tokens
/// are truncated).
FragmentRepresentation embed_tokens(std::span<const std::string> tokens,
                                    const WordVectors& vectors, int max_tokens);

FragmentRepresentation embed_fragment(const Fragment& fragment,
                                      const WordVectors& vectors, int max_tokens);

/// Questions go through the identical pipeline as fragments.
FragmentRepresentation embed_text(const std::string& sentence,
                                  const WordVectors& vectors, int max_tokens);

}  // namespace pkil
