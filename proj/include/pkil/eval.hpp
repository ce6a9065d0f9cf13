#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pkil/baseline.hpp"
#include "pkil/model.hpp"
#include "pkil/synthetic.hpp"
#include "pkil/tree.hpp"

namespace pkil {

/// Fraction of exact label matches.
double accuracy(std::span<const std::string> predictions, std::span<const std::string> gold);

/// One-vs-rest AUC per label from the rank statistic (ties get midranks),
/// averaged without weighting. Labels with no positives or no negatives are
/// excluded (reported through `excluded` when given); all-degenerate input
/// is an error.
double auc_roc_macro(std::span<const std::map<std::string, double>> scores,
                     std::span<const std::string> gold,
                     std::vector<std::string>* excluded = nullptr);

struct ConfusionTable {
  std::vector<std::string> labels;
  Eigen::MatrixXi counts;  // rows gold, columns predicted
};

struct Metrics {
  double accuracy = 0.0;
  double macro_auc_roc = 0.0;
  ConfusionTable confusion;
};

Metrics compute_metrics(std::span<const std::string> predictions,
                        std::span<const std::map<std::string, double>> scores,
                        std::span<const std::string> gold);

/// Exhaustive grid search over the kernel range per threshold; the testing
/// oracle for Newton training. Guarded to trees of at most 3 questions.
struct BruteForceResult {
  Thresholds thresholds;
  double loss = 0.0;
};
BruteForceResult brute_force_thresholds(std::span<const TrainExample> dataset,
                                        const TrainedModel& model, double grid_step,
                                        const SoftConfig& soft = {});

/// Deterministic stratified split (indices into the dataset).
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};
SplitIndices stratified_split(std::span<const AnnotatedExample> dataset, double ratio,
                              std::uint64_t seed);

struct EmbeddingSource {
  std::string name;
  std::shared_ptr<const WordVectors> vectors;
};

struct ComparisonConfig {
  double split = 0.8;
  std::uint64_t seed = 7;
  int repeats = 1;
  int newton_iterations = 25;
  int fragment_window = 2;
  int max_tokens = 30;
  double gaussian_sigma = 1.0;
  SoftConfig soft;
  BaselineConfig baseline;
};

struct ComparisonCell {
  double accuracy = 0.0;
  double auc = 0.0;
};

struct ComparisonRow {
  std::string source;
  ComparisonCell baseline;
  ComparisonCell pkil_cosine;
  ComparisonCell pkil_gaussian;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
};

/// Baseline vs PK-iL (cosine, Gaussian) on a seeded stratified split, one
/// row per embedding source; cells average over `repeats` reruns.
ComparisonTable run_comparison(std::span<const AnnotatedExample> dataset,
                               const ProcessTree& tree,
                               std::span<const EmbeddingSource> sources,
                               const ComparisonConfig& config);

std::string comparison_tsv(const ComparisonTable& table);
std::string comparison_text(const ComparisonTable& table);

}  // namespace pkil
