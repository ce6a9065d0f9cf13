#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pkil/embeddings.hpp"

namespace pkil {

struct BaselineConfig {
  int max_positions = 60;   // P: token positions per post
  double learning_rate = 0.1;
  int epochs = 500;
  std::uint64_t rng_seed = 0;  // kept for config parity; training starts at zero
};

/// Logistic regression over per-position scalar features, where all entries
/// of a word vector share one weight (one weight per token position).
struct SharedWeightLogReg {
  std::vector<std::string> labels;   // ordered label list
  Eigen::MatrixXd position_weights;  // labels x P
  Eigen::VectorXd biases;            // labels
  int max_positions = 0;
  double final_loss = 0.0;

  Eigen::Index label_index(const std::string& label) const;
};

/// One scalar per token position: the mean of the d entries of that token's
/// vector, zero beyond the post length and for OOV-zero tokens.
Eigen::VectorXd featurize_post(const std::string& post, const WordVectors& vectors,
                               int max_positions);

/// Batch gradient descent on softmax cross-entropy. Deterministic; requires
/// at least two distinct labels.
SharedWeightLogReg train_baseline(std::span<const std::pair<std::string, std::string>> dataset,
                                  const WordVectors& vectors, const BaselineConfig& config);

struct BaselinePrediction {
  std::string label;
  std::map<std::string, double> probabilities;  // softmax, sums to 1
};

BaselinePrediction predict_baseline(const std::string& post, const SharedWeightLogReg& model,
                                    const WordVectors& vectors);

/// Character spans of maximal runs of tokens whose per-token contribution
/// (position weight times feature, for the predicted label) exceeds the
/// threshold. Spans reference the original post text.
std::vector<std::pair<std::size_t, std::size_t>> highlight(const std::string& post,
                                                           const SharedWeightLogReg& model,
                                                           const WordVectors& vectors,
                                                           double threshold);

}  // namespace pkil
