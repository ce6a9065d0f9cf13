#include "pkil/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

#include "pkil/error.hpp"

namespace pkil {

double accuracy(std::span<const std::string> predictions, std::span<const std::string> gold) {
  if (predictions.size() != gold.size()) throw Error("accuracy: length mismatch");
  if (predictions.empty()) throw Error("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (predictions[i] == gold[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

namespace {

// One-vs-rest AUC via the Mann-Whitney rank statistic with midranks.
double binary_auc(const std::vector<double>& scores, const std::vector<bool>& positive) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = midrank;
    i = j + 1;
  }

  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (positive[k]) {
      pos_rank_sum += ranks[k];
      ++n_pos;
    }
  }
  const std::size_t n_neg = n - n_pos;
  return (pos_rank_sum - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1)) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace

double auc_roc_macro(std::span<const std::map<std::string, double>> scores,
                     std::span<const std::string> gold,
                     std::vector<std::string>* excluded) {
  if (scores.size() != gold.size()) throw Error("auc_roc_macro: length mismatch");
  if (scores.empty()) throw Error("auc_roc_macro: empty input");

  std::set<std::string> labels;
  for (const auto& [label, value] : scores.front()) labels.insert(label);

  double total = 0.0;
  int used = 0;
  for (const std::string& label : labels) {
    std::vector<double> label_scores;
    std::vector<bool> positive;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      auto it = scores[i].find(label);
      if (it == scores[i].end()) {
        throw Error("auc_roc_macro: example " + std::to_string(i) + " has no score for label \"" +
                    label + "\"");
      }
      label_scores.push_back(it->second);
      const bool pos = gold[i] == label;
      positive.push_back(pos);
      if (pos) ++n_pos;
    }
    if (n_pos == 0 || n_pos == scores.size()) {
      if (excluded) excluded->push_back(label);
      continue;
    }
    total += binary_auc(label_scores, positive);
    ++used;
  }
  if (used == 0) throw Error("auc_roc_macro: every label is degenerate");
  return total / static_cast<double>(used);
}

Metrics compute_metrics(std::span<const std::string> predictions,
                        std::span<const std::map<std::string, double>> scores,
                        std::span<const std::string> gold) {
  Metrics m;
  m.accuracy = accuracy(predictions, gold);
  m.macro_auc_roc = auc_roc_macro(scores, gold);

  std::set<std::string> label_set(gold.begin(), gold.end());
  label_set.insert(predictions.begin(), predictions.end());
  m.confusion.labels.assign(label_set.begin(), label_set.end());
  const Eigen::Index k = static_cast<Eigen::Index>(m.confusion.labels.size());
  m.confusion.counts = Eigen::MatrixXi::Zero(k, k);
  auto index = [&](const std::string& label) {
    return static_cast<Eigen::Index>(
        std::lower_bound(m.confusion.labels.begin(), m.confusion.labels.end(), label) -
        m.confusion.labels.begin());
  };
  for (std::size_t i = 0; i < gold.size(); ++i) {
    m.confusion.counts(index(gold[i]), index(predictions[i])) += 1;
  }
  return m;
}

BruteForceResult brute_force_thresholds(std::span<const TrainExample> dataset,
                                        const TrainedModel& model, double grid_step,
                                        const SoftConfig& soft) {
  if (model.tree.question_count() > 3) {
    throw Error("brute_force_thresholds: tree has " +
                std::to_string(model.tree.question_count()) + " questions (max 3)");
  }
  if (!(grid_step > 0.0)) throw Error("brute_force_thresholds: grid_step must be > 0");
  if (dataset.empty()) throw Error("brute_force_thresholds: empty dataset");

  const auto [lo, hi] = kernel_range(model.kernel);
  std::vector<double> grid;
  for (double v = lo; v <= hi + 1e-12; v += grid_step) grid.push_back(std::min(v, hi));
  if (grid.empty()) grid.push_back(lo);

  std::vector<std::string> question_ids;
  for (const auto& [qid, q] : model.tree.questions) question_ids.push_back(qid);

  const KernelCache cache = build_kernel_cache(dataset, model);

  BruteForceResult best;
  best.thresholds = model.thresholds;
  best.loss = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> odometer(question_ids.size(), 0);
  Thresholds probe = model.thresholds;
  while (true) {
    for (std::size_t q = 0; q < question_ids.size(); ++q) {
      probe.values[question_ids[q]] = grid[odometer[q]];
    }
    const double l = loss_cached(cache, model, probe, soft);
    if (l < best.loss) {
      best.loss = l;
      best.thresholds = probe;
    }
    std::size_t q = 0;
    for (; q < odometer.size(); ++q) {
      if (++odometer[q] < grid.size()) break;
      odometer[q] = 0;
    }
    if (q == odometer.size()) break;
    if (odometer.empty()) break;
  }
  return best;
}

SplitIndices stratified_split(std::span<const AnnotatedExample> dataset, double ratio,
                              std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error("split ratio must be in (0, 1)");
  std::map<std::string, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < dataset.size(); ++i) by_label[dataset[i].label].push_back(i);

  std::mt19937 rng(static_cast<std::uint32_t>(seed));
  SplitIndices split;
  for (auto& [label, indices] : by_label) {
    std::shuffle(indices.begin(), indices.end(), rng);
    const std::size_t n_train = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(ratio * static_cast<double>(indices.size()))));
    for (std::size_t i = 0; i < indices.size(); ++i) {
      (i < n_train ? split.train : split.test).push_back(indices[i]);
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());

  std::set<std::string> train_labels;
  for (std::size_t i : split.train) train_labels.insert(dataset[i].label);
  if (train_labels.size() != by_label.size()) {
    throw Error("split leaves a label absent from the training set");
  }
  return split;
}

namespace {

struct EvaluatedModel {
  std::vector<std::string> predictions;
  std::vector<std::map<std::string, double>> scores;
};

ComparisonCell to_cell(const EvaluatedModel& eval, std::span<const std::string> gold) {
  ComparisonCell cell;
  cell.accuracy = accuracy(eval.predictions, gold);
  cell.auc = auc_roc_macro(eval.scores, gold);
  return cell;
}

}  // namespace

ComparisonTable run_comparison(std::span<const AnnotatedExample> dataset,
                               const ProcessTree& tree,
                               std::span<const EmbeddingSource> sources,
                               const ComparisonConfig& config) {
  if (config.repeats < 1) throw Error("run_comparison: repeats must be >= 1");
  ComparisonTable table;
  for (const EmbeddingSource& source : sources) {
    ComparisonRow row;
    row.source = source.name;
    for (int repeat = 0; repeat < config.repeats; ++repeat) {
      const SplitIndices split =
          stratified_split(dataset, config.split, config.seed + static_cast<std::uint64_t>(repeat));

      std::vector<std::string> gold_test;
      for (std::size_t i : split.test) gold_test.push_back(dataset[i].label);

      // Leaf probabilities from the training annotations.
      std::vector<AnnotationPath> train_paths;
      for (std::size_t i : split.train) {
        for (const AnnotationPath& path : dataset[i].annotations) {
          train_paths.push_back(canonicalize_path(path, tree));
        }
      }
      const LeafProbabilities leaf_probs = estimate_leaf_probabilities(train_paths, tree);

      // PK-iL with each kernel.
      for (const KernelSpec& spec :
           {KernelSpec::cosine(), KernelSpec::gaussian(config.gaussian_sigma)}) {
        TrainedModel model;
        model.tree = tree;
        model.leaf_probs = leaf_probs;
        model.kernel = spec;
        model.thresholds = init_thresholds(tree, spec);
        model.vectors = source.vectors;
        model.max_tokens = config.max_tokens;
        model.fragment_window = config.fragment_window;
        model.finalize();

        std::vector<TrainExample> train_examples;
        for (std::size_t i : split.train) {
          train_examples.push_back(
              {analyze_post(dataset[i].text, model).reps, dataset[i].label});
        }
        model.thresholds =
            train_newton(train_examples, model, config.newton_iterations, config.soft).thresholds;

        EvaluatedModel eval;
        for (std::size_t i : split.test) {
          const PredictResult pred = predict(dataset[i].text, model);
          eval.predictions.push_back(pred.label);
          eval.scores.push_back(pred.normalized_scores);
        }
        ComparisonCell cell = to_cell(eval, gold_test);
        ComparisonCell& slot =
            spec.kind == KernelKind::cosine ? row.pkil_cosine : row.pkil_gaussian;
        slot.accuracy += cell.accuracy / config.repeats;
        slot.auc += cell.auc / config.repeats;
      }

      // Shared-weight logistic baseline.
      {
        std::vector<std::pair<std::string, std::string>> train_pairs;
        for (std::size_t i : split.train) {
          train_pairs.emplace_back(dataset[i].text, dataset[i].label);
        }
        const SharedWeightLogReg baseline_model =
            train_baseline(train_pairs, *source.vectors, config.baseline);
        EvaluatedModel eval;
        for (std::size_t i : split.test) {
          const BaselinePrediction pred =
              predict_baseline(dataset[i].text, baseline_model, *source.vectors);
          eval.predictions.push_back(pred.label);
          eval.scores.push_back(pred.probabilities);
        }
        const ComparisonCell cell = to_cell(eval, gold_test);
        row.baseline.accuracy += cell.accuracy / config.repeats;
        row.baseline.auc += cell.auc / config.repeats;
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

namespace {

std::string format_cell(const ComparisonCell& cell) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f / %.4f", cell.accuracy, cell.auc);
  return buf;
}

}  // namespace

std::string comparison_tsv(const ComparisonTable& table) {
  std::ostringstream out;
  out << "source\tbaseline_accuracy\tbaseline_auc\tcosine_accuracy\tcosine_auc"
         "\tgaussian_accuracy\tgaussian_auc\n";
  char buf[32];
  for (const ComparisonRow& row : table.rows) {
    out << row.source;
    for (double v : {row.baseline.accuracy, row.baseline.auc, row.pkil_cosine.accuracy,
                     row.pkil_cosine.auc, row.pkil_gaussian.accuracy, row.pkil_gaussian.auc}) {
      std::snprintf(buf, sizeof(buf), "\t%.6f", v);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

std::string comparison_text(const ComparisonTable& table) {
  std::size_t name_width = std::string("source").size();
  for (const ComparisonRow& row : table.rows) name_width = std::max(name_width, row.source.size());

  std::ostringstream out;
  out << "accuracy / AUC-ROC\n";
  out << std::string(name_width, ' ') << "  "
      << "baseline          PK-iL cosine      PK-iL gaussian\n";
  for (const ComparisonRow& row : table.rows) {
    out << row.source << std::string(name_width - row.source.size(), ' ') << "  "
        << format_cell(row.baseline) << "   " << format_cell(row.pkil_cosine) << "   "
        << format_cell(row.pkil_gaussian) << '\n';
  }
  return out.str();
}

}  // namespace pkil
