#include "pkil/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pkil/error.hpp"
#include "pkil/text.hpp"

namespace pkil {

Eigen::Index SharedWeightLogReg::label_index(const std::string& label) const {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) throw Error("baseline: unknown label \"" + label + "\"");
  return static_cast<Eigen::Index>(it - labels.begin());
}

Eigen::VectorXd featurize_post(const std::string& post, const WordVectors& vectors,
                               int max_positions) {
  if (max_positions < 1) throw Error("featurize_post: max_positions must be >= 1");
  Eigen::VectorXd features = Eigen::VectorXd::Zero(max_positions);
  const auto tokens = tokenize(post);
  const std::size_t count = std::min(tokens.size(), static_cast<std::size_t>(max_positions));
  for (std::size_t p = 0; p < count; ++p) {
    features[static_cast<Eigen::Index>(p)] = lookup(tokens[p], vectors).mean();
  }
  return features;
}

namespace {

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::VectorXd shifted = logits.array() - logits.maxCoeff();
  const Eigen::VectorXd e = shifted.array().exp();
  return e / e.sum();
}

}  // namespace

SharedWeightLogReg train_baseline(std::span<const std::pair<std::string, std::string>> dataset,
                                  const WordVectors& vectors, const BaselineConfig& config) {
  if (dataset.empty()) throw Error("train_baseline: empty dataset");
  std::set<std::string> label_set;
  for (const auto& [post, label] : dataset) label_set.insert(label);
  if (label_set.size() < 2) throw Error("train_baseline: dataset has a single label");

  SharedWeightLogReg model;
  model.labels.assign(label_set.begin(), label_set.end());
  model.max_positions = config.max_positions;
  const Eigen::Index n_labels = static_cast<Eigen::Index>(model.labels.size());
  const Eigen::Index n = static_cast<Eigen::Index>(dataset.size());
  const Eigen::Index p = config.max_positions;

  Eigen::MatrixXd features(n, p);
  Eigen::VectorXi gold(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    features.row(i) = featurize_post(dataset[static_cast<std::size_t>(i)].first, vectors,
                                     config.max_positions);
    gold[i] = static_cast<int>(std::distance(
        model.labels.begin(),
        std::find(model.labels.begin(), model.labels.end(),
                  dataset[static_cast<std::size_t>(i)].second)));
  }

  model.position_weights = Eigen::MatrixXd::Zero(n_labels, p);
  model.biases = Eigen::VectorXd::Zero(n_labels);

  Eigen::MatrixXd probs(n, n_labels);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Eigen::MatrixXd logits = features * model.position_weights.transpose();
    logits.rowwise() += model.biases.transpose();
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      probs.row(i) = softmax(logits.row(i)).transpose();
      total += -std::log(std::max(probs(i, gold[i]), 1e-300));
    }
    model.final_loss = total / static_cast<double>(n);

    Eigen::MatrixXd delta = probs;  // softmax - onehot
    for (Eigen::Index i = 0; i < n; ++i) delta(i, gold[i]) -= 1.0;
    delta /= static_cast<double>(n);
    model.position_weights -= config.learning_rate * (delta.transpose() * features);
    model.biases -= config.learning_rate * delta.colwise().sum().transpose();
  }
  return model;
}

BaselinePrediction predict_baseline(const std::string& post, const SharedWeightLogReg& model,
                                    const WordVectors& vectors) {
  const Eigen::VectorXd features = featurize_post(post, vectors, model.max_positions);
  const Eigen::VectorXd logits = model.position_weights * features + model.biases;
  const Eigen::VectorXd probs = softmax(logits);

  BaselinePrediction out;
  Eigen::Index best = 0;
  probs.maxCoeff(&best);
  out.label = model.labels[static_cast<std::size_t>(best)];
  for (std::size_t l = 0; l < model.labels.size(); ++l) {
    out.probabilities[model.labels[l]] = probs[static_cast<Eigen::Index>(l)];
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> highlight(const std::string& post,
                                                           const SharedWeightLogReg& model,
                                                           const WordVectors& vectors,
                                                           double threshold) {
  const auto tokens = tokenize_with_spans(post);
  const Eigen::VectorXd features = featurize_post(post, vectors, model.max_positions);
  const Eigen::Index label = model.label_index(predict_baseline(post, model, vectors).label);

  std::vector<std::pair<std::size_t, std::size_t>> spans;
  const std::size_t count =
      std::min(tokens.size(), static_cast<std::size_t>(model.max_positions));
  bool in_run = false;
  for (std::size_t p = 0; p < count; ++p) {
    const double contribution =
        model.position_weights(label, static_cast<Eigen::Index>(p)) *
        features[static_cast<Eigen::Index>(p)];
    if (contribution > threshold) {
      if (in_run) {
        spans.back().second = tokens[p].end;  // extend the current run
      } else {
        spans.emplace_back(tokens[p].begin, tokens[p].end);
        in_run = true;
      }
    } else {
      in_run = false;
    }
  }
  return spans;
}

}  // namespace pkil
