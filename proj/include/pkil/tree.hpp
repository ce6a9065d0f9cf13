#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pkil {

/// Reference to a tree node: either a question or a leaf, by id.
struct NodeRef {
  enum class Kind { question, leaf };
  Kind kind = Kind::leaf;
  std::string id;

  static NodeRef question(std::string id) { return {Kind::question, std::move(id)}; }
  static NodeRef leaf(std::string id) { return {Kind::leaf, std::move(id)}; }
  bool is_question() const { return kind == Kind::question; }
  friend bool operator==(const NodeRef&, const NodeRef&) = default;
};

/// A yes/no question node of the process tree.
struct Question {
  std::string id;
  std::string text;
  NodeRef yes_edge;
  NodeRef no_edge;
};

/// A labeled leaf. Several leaves may share a label.
struct Leaf {
  std::string id;
  std::string label;
};

enum class Answer { yes, no };

Answer answer_from_string(const std::string& s);
const char* answer_to_string(Answer a);

/// One (example, annotator) walk through the tree, as recorded in an
/// annotation file. Step ids may name sub-questions ("1.2") before
/// canonicalization.
struct AnnotationPath {
  std::string example_id;
  std::string annotator_id;
  std::vector<std::pair<std::string, Answer>> steps;
};

/// Annotator-agreement-derived weight per leaf.
struct LeafProbabilities {
  std::map<std::string, double> values;  // leaf id -> p in [0, 1]

  double at(const std::string& leaf_id) const;
};

/// A root-to-leaf walk with the branch direction taken at each question:
/// +1 for the yes edge, -1 for the no edge.
struct SignedPath {
  std::vector<std::pair<std::string, int>> steps;  // (question id, sign)
  std::string leaf_id;
  std::string label;
};

/// The expert process-knowledge decision tree. Stores main questions only;
/// sub-question ids are kept as aliases for path canonicalization.
/// Immutable after parse_tree; safe for concurrent reads.
struct ProcessTree {
  NodeRef root;
  std::map<std::string, Question> questions;
  std::map<std::string, Leaf> leaves;
  std::map<std::string, std::string> sub_questions;  // sub id -> main id

  std::size_t question_count() const { return questions.size(); }
  const Question& question(const std::string& id) const;
  const Leaf& leaf(const std::string& id) const;
  /// Distinct leaf labels, sorted.
  std::vector<std::string> labels() const;
  /// Sum of leaf probabilities per label (the label's prior mass).
  std::map<std::string, double> label_priors(const LeafProbabilities& probs) const;
};

/// Parses and validates a tree document (JSON text, see the file schema in
/// the README). Throws Error naming the offending id on: duplicate id,
/// dangling edge, cycle, unreachable node, empty leaf label, bad
/// sub-question parent.
ProcessTree parse_tree(const std::string& document);

/// Convenience: read the document from a file first.
ProcessTree load_tree(const std::string& path);

/// Serializes a tree back to its JSON document form.
std::string tree_to_json(const ProcessTree& tree);

/// Replaces sub-question ids by their main-question id and validates that
/// the result traces a root-to-leaf walk. Throws on unknown ids or paths
/// that do not follow the tree.
AnnotationPath canonicalize_path(const AnnotationPath& path, const ProcessTree& tree);

/// Leaf id reached by a canonical path. Throws if the path does not trace
/// the tree from the root down to a leaf.
std::string path_leaf(const AnnotationPath& path, const ProcessTree& tree);

/// Estimates leaf probabilities from canonicalized annotator paths.
/// Per example, each leaf's ratio is (annotators ending there) / (total
/// annotators); p_l averages those ratios over the examples where the leaf
/// was reached at all. Unreached leaves get 0.
LeafProbabilities estimate_leaf_probabilities(std::span<const AnnotationPath> annotations,
                                              const ProcessTree& tree);

/// One signed path per leaf, in depth-first yes-before-no order.
std::vector<SignedPath> enumerate_signed_paths(const ProcessTree& tree);

}  // namespace pkil
