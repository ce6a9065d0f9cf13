#include "pkil/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pkil/error.hpp"

namespace pkil {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

}  // namespace

double Thresholds::at(const std::string& question_id) const {
  auto it = values.find(question_id);
  if (it == values.end()) throw Error("no threshold for question \"" + question_id + "\"");
  return it->second;
}

void validate(const SoftConfig& soft) {
  if (!(soft.tau > 0.0)) throw Error("soft tau must be > 0");
  if (!(soft.epsilon > 0.0 && soft.epsilon < 0.5)) throw Error("soft epsilon must be in (0, 0.5)");
}

void TrainedModel::finalize() {
  if (!vectors) throw Error("model has no word vectors; use finalize_with_reps");
  std::map<std::string, FragmentRepresentation> reps;
  for (const auto& [id, q] : tree.questions) {
    reps.emplace(id, embed_text(q.text, *vectors, max_tokens));
  }
  finalize_with_reps(std::move(reps));
}

void TrainedModel::finalize_with_reps(std::map<std::string, FragmentRepresentation> reps) {
  paths = enumerate_signed_paths(tree);
  labels = tree.labels();
  question_reps = std::move(reps);
  for (const auto& [id, q] : tree.questions) {
    if (!question_reps.count(id)) throw Error("missing representation for question \"" + id + "\"");
  }
}

Thresholds init_thresholds(const ProcessTree& tree, const KernelSpec& kernel) {
  const auto [lo, hi] = kernel_range(kernel);
  Thresholds thresholds;
  for (const auto& [id, q] : tree.questions) thresholds.values[id] = 0.5 * (lo + hi);
  return thresholds;
}

AnalyzedPost analyze_post(const std::string& post, const TrainedModel& model) {
  if (!model.vectors) throw Error("model has no word vectors attached");
  AnalyzedPost out;
  out.fragments = extract_fragments(post, model.fragment_window);
  out.reps.reserve(out.fragments.size());
  for (const Fragment& f : out.fragments) {
    out.reps.push_back(embed_fragment(f, *model.vectors, model.max_tokens));
  }
  return out;
}

bool question_indicator_hard(std::span<const FragmentRepresentation> fragments,
                             const FragmentRepresentation& q_rep, int sign,
                             double theta, const KernelSpec& spec) {
  const double s = sign >= 0 ? 1.0 : -1.0;
  for (const FragmentRepresentation& f : fragments) {
    if (s * kernel(spec, f.vector, q_rep.vector) >= s * theta) return true;
  }
  return false;
}

double question_indicator_soft(std::span<const FragmentRepresentation> fragments,
                               const FragmentRepresentation& q_rep, int sign,
                               double theta, const KernelSpec& spec,
                               const SoftConfig& soft) {
  validate(soft);
  const double s = sign >= 0 ? 1.0 : -1.0;
  double sum = 0.0;
  for (const FragmentRepresentation& f : fragments) {
    sum += sigmoid(s * (kernel(spec, f.vector, q_rep.vector) - theta) / soft.tau);
  }
  return sigmoid((sum - 0.5) / soft.tau);
}

double best_kernel(std::span<const FragmentRepresentation> fragments,
                   const FragmentRepresentation& q_rep, const KernelSpec& spec) {
  double best = -std::numeric_limits<double>::infinity();
  for (const FragmentRepresentation& f : fragments) {
    best = std::max(best, kernel(spec, f.vector, q_rep.vector));
  }
  return best;
}

ExampleKernels example_kernels(std::span<const FragmentRepresentation> fragments,
                               const TrainedModel& model) {
  ExampleKernels out;
  for (const auto& [qid, q_rep] : model.question_reps) {
    Eigen::VectorXd ks(static_cast<Eigen::Index>(fragments.size()));
    for (std::size_t j = 0; j < fragments.size(); ++j) {
      ks[static_cast<Eigen::Index>(j)] = kernel(model.kernel, fragments[j].vector, q_rep.vector);
    }
    out.per_question.emplace(qid, std::move(ks));
  }
  return out;
}

KernelCache build_kernel_cache(std::span<const TrainExample> dataset,
                               const TrainedModel& model) {
  KernelCache cache;
  cache.reserve(dataset.size());
  for (const TrainExample& example : dataset) {
    ExampleKernels ek = example_kernels(example.fragments, model);
    ek.label = example.label;
    cache.push_back(std::move(ek));
  }
  return cache;
}

namespace {

// Hard step test on the cached kernel values: the tree walk compares the
// best kernel value against the threshold, so at most one path is satisfied
// unless the best value ties the threshold exactly (then both branches
// count, mirroring the two >= inequalities).
bool hard_step(const Eigen::VectorXd& ks, int sign, double theta) {
  if (ks.size() == 0) return false;
  const double best = ks.maxCoeff();
  return sign >= 0 ? best >= theta : best <= theta;
}

double soft_step(const Eigen::VectorXd& ks, int sign, double theta, double tau) {
  const double s = sign >= 0 ? 1.0 : -1.0;
  double sum = 0.0;
  for (Eigen::Index j = 0; j < ks.size(); ++j) {
    sum += sigmoid(s * (ks[j] - theta) / tau);
  }
  return sigmoid((sum - 0.5) / tau);
}

double path_product(const SignedPath& path, const ExampleKernels& ek,
                    const Thresholds& thresholds, ScoreMode mode, const SoftConfig& soft) {
  double product = 1.0;
  for (const auto& [qid, sign] : path.steps) {
    const Eigen::VectorXd& ks = ek.per_question.at(qid);
    const double theta = thresholds.at(qid);
    if (mode == ScoreMode::hard) {
      if (!hard_step(ks, sign, theta)) return 0.0;
    } else {
      product *= soft_step(ks, sign, theta, soft.tau);
    }
  }
  return product;
}

std::map<std::string, double> scores_from_kernels(const ExampleKernels& ek,
                                                  const TrainedModel& model,
                                                  const Thresholds& thresholds,
                                                  ScoreMode mode, const SoftConfig& soft) {
  std::map<std::string, double> scores;
  for (const std::string& label : model.labels) scores[label] = 0.0;
  for (const SignedPath& path : model.paths) {
    const double p = model.leaf_probs.at(path.leaf_id);
    if (p == 0.0) continue;
    scores[path.label] += p * path_product(path, ek, thresholds, mode, soft);
  }
  return scores;
}

}  // namespace

double label_score(std::span<const FragmentRepresentation> fragments,
                   const std::string& label, const TrainedModel& model,
                   ScoreMode mode, const SoftConfig& soft) {
  const auto scores = label_scores(fragments, model, mode, soft);
  auto it = scores.find(label);
  if (it == scores.end()) throw Error("unknown label: \"" + label + "\"");
  return it->second;
}

std::map<std::string, double> label_scores(std::span<const FragmentRepresentation> fragments,
                                           const TrainedModel& model, ScoreMode mode,
                                           const SoftConfig& soft) {
  if (mode == ScoreMode::soft) validate(soft);
  const ExampleKernels ek = example_kernels(fragments, model);
  return scores_from_kernels(ek, model, model.thresholds, mode, soft);
}

namespace {

PredictResult predict_from_scores(const std::map<std::string, double>& scores,
                                  const TrainedModel& model) {
  double total = 0.0;
  for (const auto& [label, s] : scores) total += s;

  PredictResult result;
  if (total > 0.0) {
    for (const auto& [label, s] : scores) result.normalized_scores[label] = s / total;
  } else {
    // No satisfied path: fall back to the label priors.
    result.fallback = true;
    auto priors = model.tree.label_priors(model.leaf_probs);
    double prior_total = 0.0;
    for (const auto& [label, p] : priors) prior_total += p;
    for (const auto& [label, p] : priors) {
      result.normalized_scores[label] =
          prior_total > 0.0 ? p / prior_total : 1.0 / static_cast<double>(priors.size());
    }
  }
  result.label = result.normalized_scores.begin()->first;
  for (const auto& [label, s] : result.normalized_scores) {
    if (s > result.normalized_scores.at(result.label)) result.label = label;
  }
  return result;
}

}  // namespace

PredictResult predict_fragments(std::span<const FragmentRepresentation> fragments,
                                const TrainedModel& model) {
  return predict_from_scores(label_scores(fragments, model, ScoreMode::hard), model);
}

PredictResult predict(const std::string& post, const TrainedModel& model) {
  return predict_fragments(analyze_post(post, model).reps, model);
}

double loss_cached(const KernelCache& cache, const TrainedModel& model,
                   const Thresholds& thresholds, const SoftConfig& soft) {
  validate(soft);
  if (cache.empty()) throw Error("loss: empty dataset");
  double total = 0.0;
  for (const ExampleKernels& ek : cache) {
    const auto scores = scores_from_kernels(ek, model, thresholds, ScoreMode::soft, soft);
    auto it = scores.find(ek.label);
    if (it == scores.end()) throw Error("loss: example label \"" + ek.label + "\" not in tree");
    double sum = 0.0;
    for (const auto& [label, s] : scores) sum += s;
    const double p = sum > 0.0 ? clamp(it->second / sum, soft.epsilon, 1.0 - soft.epsilon)
                               : soft.epsilon;
    total += -std::log(p);
  }
  return total / static_cast<double>(cache.size());
}

double loss(std::span<const TrainExample> dataset, const TrainedModel& model,
            const Thresholds& thresholds, const SoftConfig& soft) {
  return loss_cached(build_kernel_cache(dataset, model), model, thresholds, soft);
}

Derivatives finite_diff(const std::function<double(double)>& f, double x, double h) {
  const double fp = f(x + h);
  const double fm = f(x - h);
  const double f0 = f(x);
  return {(fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h)};
}

Derivatives grad_and_curvature(std::span<const TrainExample> dataset,
                               const Thresholds& thresholds, const TrainedModel& model,
                               const SoftConfig& soft, const std::string& question_id) {
  const KernelCache cache = build_kernel_cache(dataset, model);
  Thresholds work = thresholds;
  const double theta = work.at(question_id);
  auto f = [&](double t) {
    work.values[question_id] = t;
    return loss_cached(cache, model, work, soft);
  };
  return finite_diff(f, theta);
}

NewtonResult train_newton(std::span<const TrainExample> dataset,
                          const TrainedModel& model, int iterations,
                          const SoftConfig& soft) {
  validate(soft);
  if (iterations < 0) throw Error("train_newton: iterations must be >= 0");
  if (dataset.empty()) throw Error("train_newton: empty dataset");

  const KernelCache cache = build_kernel_cache(dataset, model);
  const auto [range_lo, range_hi] = kernel_range(model.kernel);
  constexpr double kStep = 1e-3;
  constexpr int kMaxBackoff = 12;

  NewtonResult result;
  result.thresholds = model.thresholds;
  Thresholds& thresholds = result.thresholds;

  for (int sweep = 1; sweep <= iterations; ++sweep) {
    for (auto& [qid, theta] : thresholds.values) {
      auto f = [&, qid = qid](double t) {
        Thresholds probe = thresholds;
        probe.values[qid] = t;
        return loss_cached(cache, model, probe, soft);
      };
      const double f0 = f(theta);
      const double fp = f(theta + kStep);
      const double fm = f(theta - kStep);
      const double gradient = (fp - fm) / (2.0 * kStep);
      const double curvature = (fp - 2.0 * f0 + fm) / (kStep * kStep);
      if (gradient == 0.0) continue;

      // Damped Newton step. The curvature enters by magnitude so the step
      // always points downhill, and the +1 keeps the divisor away from zero;
      // a halving backtrack accepts only non-increasing moves.
      double step = gradient / (std::abs(curvature) + 1.0);
      double proposal = clamp(theta - step, range_lo, range_hi);
      double trial = f(proposal);
      for (int backoff = 0; trial > f0 && backoff < kMaxBackoff; ++backoff) {
        step *= 0.5;
        proposal = clamp(theta - step, range_lo, range_hi);
        trial = f(proposal);
      }
      if (trial <= f0) theta = proposal;
    }
    const double sweep_loss = loss_cached(cache, model, thresholds, soft);
    if (!std::isfinite(sweep_loss)) {
      throw Error("train_newton: non-finite loss at iteration " + std::to_string(sweep));
    }
    result.trajectory.push_back(sweep_loss);
  }
  return result;
}

Explanation explain(const std::string& post, const TrainedModel& model) {
  const AnalyzedPost analyzed = analyze_post(post, model);
  const ExampleKernels ek = example_kernels(analyzed.reps, model);
  const auto scores = scores_from_kernels(ek, model, model.thresholds, ScoreMode::hard, {});
  const PredictResult prediction = predict_from_scores(scores, model);

  Explanation out;
  out.label = prediction.label;
  out.normalized_scores = prediction.normalized_scores;
  out.fallback = prediction.fallback;

  if (prediction.fallback) {
    // No satisfied path; report the question whose evidence came closest.
    double best_gap = std::numeric_limits<double>::infinity();
    for (const auto& [qid, ks] : ek.per_question) {
      if (ks.size() == 0) continue;
      const double gap = std::abs(ks.maxCoeff() - model.thresholds.at(qid));
      if (gap < best_gap) {
        best_gap = gap;
        out.closest_question_id = qid;
      }
    }
    return out;
  }

  NodeRef node = model.tree.root;
  while (node.is_question()) {
    const Question& q = model.tree.question(node.id);
    const Eigen::VectorXd& ks = ek.per_question.at(node.id);
    const double theta = model.thresholds.at(node.id);
    const bool yes = ks.size() > 0 && ks.maxCoeff() >= theta;

    ExplanationStep step;
    step.question_id = node.id;
    step.question_text = q.text;
    step.answer = yes ? Answer::yes : Answer::no;
    step.threshold = theta;
    Eigen::Index best_j = 0;
    if (yes) {
      ks.maxCoeff(&best_j);
    } else {
      ks.minCoeff(&best_j);
    }
    step.kernel_value = ks[best_j];
    step.best_fragment = analyzed.fragments[static_cast<std::size_t>(best_j)];
    out.steps.push_back(std::move(step));

    node = yes ? q.yes_edge : q.no_edge;
  }
  out.leaf_id = node.id;
  out.leaf_probability = model.leaf_probs.at(node.id);
  return out;
}

std::string render_explanation(const Explanation& explanation) {
  if (explanation.fallback) {
    std::string line = "no satisfied path; fallback to " + explanation.label;
    if (!explanation.closest_question_id.empty()) {
      line += " (closest question: " + explanation.closest_question_id + ")";
    }
    return line;
  }
  std::string line;
  for (const ExplanationStep& step : explanation.steps) {
    line += step.question_text;
    line += step.answer == Answer::yes ? " (yes)" : " (no)";
    line += " → ";
  }
  line += explanation.label;
  return line;
}

}  // namespace pkil
