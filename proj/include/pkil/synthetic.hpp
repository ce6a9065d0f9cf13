#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pkil/tree.hpp"

namespace pkil {

/// A generated example: post text, gold label, and one path per annotator.
struct AnnotatedExample {
  std::string id;
  std::string text;
  std::string label;
  std::string leaf_id;  // leaf of the sampled gold path (synthetic data only)
  std::vector<AnnotationPath> annotations;
};

struct SyntheticConfig {
  int n_examples = 120;
  int n_annotators = 3;
  double label_noise = 0.0;  // probability an annotator diverts from the sampled path
  /// Tail words appended to question-echo sentences, per question id.
  /// Questions without an entry get deterministic generated words.
  std::map<std::string, std::vector<std::string>> themes;
  std::uint64_t rng_seed = 1;
  int min_distractors = 1;
  int max_distractors = 3;
  /// Emit declared sub-question ids in annotator paths half the time.
  bool use_sub_question_ids = true;
};

void validate(const SyntheticConfig& config);

/// Samples a leaf per example, writes question-echo sentences for every
/// yes step of its path plus distractor sentences, and derives annotator
/// paths that agree with the sampled path with probability 1 - label_noise
/// (otherwise diverting at a random step). Deterministic per rng_seed.
std::vector<AnnotatedExample> generate_synthetic(const SyntheticConfig& config,
                                                 const ProcessTree& tree);

/// Training corpus for the word-vector model: one line per post, plus each
/// question text repeated so its tokens clear min_count.
std::vector<std::string> build_corpus(std::span<const AnnotatedExample> dataset,
                                      const ProcessTree& tree);

}  // namespace pkil
