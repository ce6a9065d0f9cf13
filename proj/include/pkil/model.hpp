#pragma once

#include <Eigen/Core>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pkil/embeddings.hpp"
#include "pkil/kernels.hpp"
#include "pkil/text.hpp"
#include "pkil/tree.hpp"

namespace pkil {

/// Per-question similarity thresholds, kept inside the active kernel range.
struct Thresholds {
  std::map<std::string, double> values;  // question id -> theta

  double at(const std::string& question_id) const;
};

/// Parameters of the differentiable training surrogate.
struct SoftConfig {
  double tau = 0.05;      // sigmoid temperature, > 0
  double epsilon = 1e-6;  // probability clamp, in (0, 0.5)
};

void validate(const SoftConfig& soft);

enum class ScoreMode { hard, soft };

/// The complete PK-iL parameterization: tree, leaf probabilities,
/// thresholds, kernel and embedding configuration. Immutable once built;
/// prediction and explanation are pure.
struct TrainedModel {
  ProcessTree tree;
  LeafProbabilities leaf_probs;
  Thresholds thresholds;
  KernelSpec kernel;
  std::shared_ptr<const WordVectors> vectors;
  int max_tokens = 30;      // M
  int fragment_window = 2;

  // Derived state, built by finalize().
  std::vector<SignedPath> paths;
  std::map<std::string, FragmentRepresentation> question_reps;
  std::vector<std::string> labels;

  /// Recomputes signed paths and labels, and embeds every question text
  /// through the fragment pipeline (requires vectors).
  void finalize();
  /// Same but keeping externally supplied question representations.
  void finalize_with_reps(std::map<std::string, FragmentRepresentation> reps);
};

/// Midpoint-of-kernel-range initialization for every main question.
Thresholds init_thresholds(const ProcessTree& tree, const KernelSpec& kernel);

/// Post text -> fragments plus their representations under the model's
/// embedding configuration.
struct AnalyzedPost {
  std::vector<Fragment> fragments;
  std::vector<FragmentRepresentation> reps;
};
AnalyzedPost analyze_post(const std::string& post, const TrainedModel& model);

/// A training example: fragment representations plus the gold label.
struct TrainExample {
  std::vector<FragmentRepresentation> fragments;
  std::string label;
};

/// Literal per-fragment OR: true iff some fragment f has
/// sign*K(f, q) >= sign*theta. Empty fragment lists are false.
bool question_indicator_hard(std::span<const FragmentRepresentation> fragments,
                             const FragmentRepresentation& q_rep, int sign,
                             double theta, const KernelSpec& kernel);

/// Logistic relaxation of the OR: per fragment s_j = sigma(sign*(K_j -
/// theta)/tau), output sigma((sum_j s_j - 0.5)/tau). Converges to the hard
/// indicator away from the decision boundary as tau -> 0.
double question_indicator_soft(std::span<const FragmentRepresentation> fragments,
                               const FragmentRepresentation& q_rep, int sign,
                               double theta, const KernelSpec& kernel,
                               const SoftConfig& soft);

/// Largest kernel value over the fragments for one question: the statistic
/// the hard tree walk compares against the threshold.
double best_kernel(std::span<const FragmentRepresentation> fragments,
                   const FragmentRepresentation& q_rep, const KernelSpec& kernel);

/// Kernel values of every fragment against every question, cached per
/// example so that threshold sweeps do not recompute inner products.
struct ExampleKernels {
  std::map<std::string, Eigen::VectorXd> per_question;  // question id -> K_j
  std::string label;
};
using KernelCache = std::vector<ExampleKernels>;

KernelCache build_kernel_cache(std::span<const TrainExample> dataset,
                               const TrainedModel& model);
ExampleKernels example_kernels(std::span<const FragmentRepresentation> fragments,
                               const TrainedModel& model);

/// Score of one label: sum over the label's leaves of p_l times the product
/// of per-step question indicators along the leaf's signed path.
///
/// Hard mode follows the tree walk: a yes step is satisfied when the best
/// (largest) kernel value reaches the threshold, a no step when it does not
/// exceed it, so exactly one root-to-leaf path is satisfied unless a kernel
/// value ties a threshold exactly. Soft mode uses the logistic OR per step.
double label_score(std::span<const FragmentRepresentation> fragments,
                   const std::string& label, const TrainedModel& model,
                   ScoreMode mode, const SoftConfig& soft = {});

/// All labels at once.
std::map<std::string, double> label_scores(std::span<const FragmentRepresentation> fragments,
                                           const TrainedModel& model, ScoreMode mode,
                                           const SoftConfig& soft = {});

struct PredictResult {
  std::string label;
  std::map<std::string, double> normalized_scores;  // sums to 1
  bool fallback = false;  // no satisfied path; label chosen by prior mass
};

/// Hard-mode prediction: argmax label of the normalized scores, or the
/// highest-prior label (flagged) when every score is zero.
PredictResult predict(const std::string& post, const TrainedModel& model);
PredictResult predict_fragments(std::span<const FragmentRepresentation> fragments,
                                const TrainedModel& model);

/// Mean negative log-likelihood of the gold labels under soft scoring,
/// with the per-example probability normalized across labels and clamped
/// to [epsilon, 1 - epsilon].
double loss(std::span<const TrainExample> dataset, const TrainedModel& model,
            const Thresholds& thresholds, const SoftConfig& soft);
double loss_cached(const KernelCache& cache, const TrainedModel& model,
                   const Thresholds& thresholds, const SoftConfig& soft);

/// Central finite differences of a scalar function.
struct Derivatives {
  double gradient = 0.0;
  double curvature = 0.0;
};
Derivatives finite_diff(const std::function<double(double)>& f, double x,
                        double h = 1e-3);

/// Finite-difference gradient and curvature of the training loss in one
/// question's threshold.
Derivatives grad_and_curvature(std::span<const TrainExample> dataset,
                               const Thresholds& thresholds, const TrainedModel& model,
                               const SoftConfig& soft, const std::string& question_id);

struct NewtonResult {
  Thresholds thresholds;
  std::vector<double> trajectory;  // loss after each sweep, size = iterations
};

/// Damped per-coordinate Newton sweeps over the question thresholds:
/// theta <- theta - grad/(|curvature| + 1), clamped to the kernel range,
/// with a halving backtrack that accepts only non-increasing moves (so the
/// recorded loss trajectory never rises). Deterministic; throws if the loss
/// turns non-finite, naming the sweep.
NewtonResult train_newton(std::span<const TrainExample> dataset,
                          const TrainedModel& model, int iterations,
                          const SoftConfig& soft);

struct ExplanationStep {
  std::string question_id;
  std::string question_text;
  Answer answer = Answer::no;
  Fragment best_fragment;   // argmax over fragments of sign*(K - theta)
  double kernel_value = 0.0;
  double threshold = 0.0;
};

struct Explanation {
  std::string leaf_id;
  std::string label;
  double leaf_probability = 0.0;
  std::vector<ExplanationStep> steps;  // the satisfied signed path
  std::map<std::string, double> normalized_scores;
  bool fallback = false;
  std::string closest_question_id;  // nearest |K - theta| when fallback
};

/// Evaluates the hard walk and reports the satisfied path with per-step
/// evidence. Fallback predictions carry no path, only the question whose
/// best kernel value came closest to its threshold.
Explanation explain(const std::string& post, const TrainedModel& model);

/// "Q text (yes) -> Q text (no) -> label" rendering.
std::string render_explanation(const Explanation& explanation);

}  // namespace pkil
