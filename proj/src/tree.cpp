#include "pkil/tree.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pkil/error.hpp"

namespace pkil {

using nlohmann::json;

Answer answer_from_string(const std::string& s) {
  if (s == "yes") return Answer::yes;
  if (s == "no") return Answer::no;
  throw Error("answer must be \"yes\" or \"no\", got \"" + s + "\"");
}

const char* answer_to_string(Answer a) { return a == Answer::yes ? "yes" : "no"; }

double LeafProbabilities::at(const std::string& leaf_id) const {
  auto it = values.find(leaf_id);
  return it == values.end() ? 0.0 : it->second;
}

const Question& ProcessTree::question(const std::string& id) const {
  auto it = questions.find(id);
  if (it == questions.end()) throw Error("unknown question id: " + id);
  return it->second;
}

const Leaf& ProcessTree::leaf(const std::string& id) const {
  auto it = leaves.find(id);
  if (it == leaves.end()) throw Error("unknown leaf id: " + id);
  return it->second;
}

std::vector<std::string> ProcessTree::labels() const {
  std::set<std::string> set;
  for (const auto& [id, leaf] : leaves) set.insert(leaf.label);
  return {set.begin(), set.end()};
}

std::map<std::string, double> ProcessTree::label_priors(const LeafProbabilities& probs) const {
  std::map<std::string, double> priors;
  for (const std::string& label : labels()) priors[label] = 0.0;
  for (const auto& [id, leaf] : leaves) priors[leaf.label] += probs.at(id);
  return priors;
}

namespace {

NodeRef parse_node_ref(const json& j, const std::string& where) {
  if (!j.is_object() || j.size() != 1) {
    throw Error("edge of " + where + " must be {\"question\": id} or {\"leaf\": id}");
  }
  if (j.contains("question")) return NodeRef::question(j.at("question").get<std::string>());
  if (j.contains("leaf")) return NodeRef::leaf(j.at("leaf").get<std::string>());
  throw Error("edge of " + where + " must be {\"question\": id} or {\"leaf\": id}");
}

json node_ref_to_json(const NodeRef& ref) {
  return ref.is_question() ? json{{"question", ref.id}} : json{{"leaf", ref.id}};
}

void check_resolves(const NodeRef& ref, const ProcessTree& tree, const std::string& from) {
  if (ref.is_question()) {
    if (!tree.questions.count(ref.id)) {
      throw Error("dangling edge: " + from + " references missing question \"" + ref.id + "\"");
    }
  } else if (!tree.leaves.count(ref.id)) {
    throw Error("dangling edge: " + from + " references missing leaf \"" + ref.id + "\"");
  }
}

// Walks the tree from the root, rejecting cycles and shared nodes, and
// marking what it reaches.
void walk_structure(const ProcessTree& tree, const NodeRef& node,
                    std::set<std::string>& on_stack,
                    std::set<std::string>& seen_questions,
                    std::set<std::string>& seen_leaves) {
  if (!node.is_question()) {
    if (!seen_leaves.insert(node.id).second) {
      throw Error("leaf \"" + node.id + "\" is reachable by more than one path");
    }
    return;
  }
  if (on_stack.count(node.id)) throw Error("cycle detected at question \"" + node.id + "\"");
  if (!seen_questions.insert(node.id).second) {
    throw Error("question \"" + node.id + "\" is reachable by more than one path");
  }
  on_stack.insert(node.id);
  const Question& q = tree.question(node.id);
  walk_structure(tree, q.yes_edge, on_stack, seen_questions, seen_leaves);
  walk_structure(tree, q.no_edge, on_stack, seen_questions, seen_leaves);
  on_stack.erase(node.id);
}

}  // namespace

ProcessTree parse_tree(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception& e) {
    throw Error(std::string("tree document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("root") || !doc.contains("questions") ||
      !doc.contains("leaves")) {
    throw Error("tree document must have fields root, questions, leaves");
  }

  ProcessTree tree;
  tree.root = parse_node_ref(doc.at("root"), "root");

  std::set<std::string> all_ids;
  auto claim_id = [&all_ids](const std::string& id) {
    if (id.empty()) throw Error("empty node id");
    if (!all_ids.insert(id).second) throw Error("duplicate id: \"" + id + "\"");
  };

  std::map<std::string, std::string> pending_subs;  // sub id -> parent id
  for (const json& jq : doc.at("questions")) {
    const std::string id = jq.at("id").get<std::string>();
    claim_id(id);
    if (jq.contains("parent_id") && !jq.at("parent_id").is_null()) {
      if (jq.contains("yes") || jq.contains("no")) {
        throw Error("sub-question \"" + id + "\" may not define edges");
      }
      pending_subs[id] = jq.at("parent_id").get<std::string>();
      continue;
    }
    Question q;
    q.id = id;
    q.text = jq.value("text", std::string{});
    if (!jq.contains("yes") || !jq.contains("no")) {
      throw Error("question \"" + id + "\" must define both yes and no edges");
    }
    q.yes_edge = parse_node_ref(jq.at("yes"), "question \"" + id + "\"");
    q.no_edge = parse_node_ref(jq.at("no"), "question \"" + id + "\"");
    tree.questions.emplace(id, std::move(q));
  }

  for (const json& jl : doc.at("leaves")) {
    Leaf leaf;
    leaf.id = jl.at("id").get<std::string>();
    claim_id(leaf.id);
    leaf.label = jl.at("label").get<std::string>();
    if (leaf.label.empty()) throw Error("leaf \"" + leaf.id + "\" has an empty label");
    tree.leaves.emplace(leaf.id, std::move(leaf));
  }

  for (auto& [sub, parent] : pending_subs) {
    if (!tree.questions.count(parent)) {
      throw Error("sub-question \"" + sub + "\" names unknown main question \"" + parent + "\"");
    }
    tree.sub_questions.emplace(sub, parent);
  }

  if (tree.leaves.empty()) throw Error("tree has no leaves");

  check_resolves(tree.root, tree, "root");
  for (const auto& [id, q] : tree.questions) {
    check_resolves(q.yes_edge, tree, "question \"" + id + "\"");
    check_resolves(q.no_edge, tree, "question \"" + id + "\"");
  }

  std::set<std::string> on_stack, seen_questions, seen_leaves;
  walk_structure(tree, tree.root, on_stack, seen_questions, seen_leaves);
  for (const auto& [id, q] : tree.questions) {
    if (!seen_questions.count(id)) throw Error("unreachable node: question \"" + id + "\"");
  }
  for (const auto& [id, leaf] : tree.leaves) {
    if (!seen_leaves.count(id)) throw Error("unreachable node: leaf \"" + id + "\"");
  }
  return tree;
}

ProcessTree load_tree(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open tree file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_tree(buf.str());
}

std::string tree_to_json(const ProcessTree& tree) {
  json doc;
  doc["root"] = node_ref_to_json(tree.root);
  json questions = json::array();
  for (const auto& [id, q] : tree.questions) {
    questions.push_back({{"id", id},
                         {"text", q.text},
                         {"yes", node_ref_to_json(q.yes_edge)},
                         {"no", node_ref_to_json(q.no_edge)}});
  }
  for (const auto& [sub, parent] : tree.sub_questions) {
    questions.push_back({{"id", sub}, {"parent_id", parent}});
  }
  doc["questions"] = std::move(questions);
  json leaves = json::array();
  for (const auto& [id, leaf] : tree.leaves) {
    leaves.push_back({{"id", id}, {"label", leaf.label}});
  }
  doc["leaves"] = std::move(leaves);
  return doc.dump(2);
}

AnnotationPath canonicalize_path(const AnnotationPath& path, const ProcessTree& tree) {
  AnnotationPath out;
  out.example_id = path.example_id;
  out.annotator_id = path.annotator_id;
  out.steps.reserve(path.steps.size());
  for (const auto& [qid, answer] : path.steps) {
    auto sub = tree.sub_questions.find(qid);
    if (sub != tree.sub_questions.end()) {
      out.steps.emplace_back(sub->second, answer);
    } else if (tree.questions.count(qid)) {
      out.steps.emplace_back(qid, answer);
    } else {
      throw Error("unknown question id in path of example \"" + path.example_id +
                  "\": \"" + qid + "\"");
    }
  }
  path_leaf(out, tree);  // validates the walk
  return out;
}

std::string path_leaf(const AnnotationPath& path, const ProcessTree& tree) {
  NodeRef node = tree.root;
  for (const auto& [qid, answer] : path.steps) {
    if (!node.is_question() || node.id != qid) {
      throw Error("path of example \"" + path.example_id +
                  "\" does not trace the tree at question \"" + qid + "\"");
    }
    const Question& q = tree.question(qid);
    node = answer == Answer::yes ? q.yes_edge : q.no_edge;
  }
  if (node.is_question()) {
    throw Error("path of example \"" + path.example_id + "\" stops before a leaf (at question \"" +
                node.id + "\")");
  }
  return node.id;
}

LeafProbabilities estimate_leaf_probabilities(std::span<const AnnotationPath> annotations,
                                              const ProcessTree& tree) {
  if (annotations.empty()) throw Error("empty annotation set");

  // example id -> (leaf id -> annotator count, total annotators)
  std::map<std::string, std::map<std::string, int>> leaf_counts;
  std::map<std::string, int> totals;
  std::set<std::pair<std::string, std::string>> seen;
  for (const AnnotationPath& path : annotations) {
    if (!seen.emplace(path.example_id, path.annotator_id).second) {
      throw Error("duplicate annotation for example \"" + path.example_id +
                  "\" by annotator \"" + path.annotator_id + "\"");
    }
    const std::string leaf = path_leaf(path, tree);
    ++leaf_counts[path.example_id][leaf];
    ++totals[path.example_id];
  }

  std::map<std::string, double> ratio_sum;
  std::map<std::string, int> ratio_examples;
  for (const auto& [example, counts] : leaf_counts) {
    const double total = totals[example];
    for (const auto& [leaf, count] : counts) {
      ratio_sum[leaf] += static_cast<double>(count) / total;
      ++ratio_examples[leaf];
    }
  }

  LeafProbabilities probs;
  for (const auto& [id, leaf] : tree.leaves) {
    auto it = ratio_sum.find(id);
    probs.values[id] = it == ratio_sum.end() ? 0.0 : it->second / ratio_examples[id];
  }
  return probs;
}

namespace {

void enumerate_from(const ProcessTree& tree, const NodeRef& node,
                    std::vector<std::pair<std::string, int>>& prefix,
                    std::vector<SignedPath>& out) {
  if (!node.is_question()) {
    const Leaf& leaf = tree.leaf(node.id);
    out.push_back({prefix, leaf.id, leaf.label});
    return;
  }
  const Question& q = tree.question(node.id);
  prefix.emplace_back(node.id, +1);
  enumerate_from(tree, q.yes_edge, prefix, out);
  prefix.back().second = -1;
  enumerate_from(tree, q.no_edge, prefix, out);
  prefix.pop_back();
}

}  // namespace

std::vector<SignedPath> enumerate_signed_paths(const ProcessTree& tree) {
  std::vector<SignedPath> out;
  std::vector<std::pair<std::string, int>> prefix;
  enumerate_from(tree, tree.root, prefix, out);
  return out;
}

}  // namespace pkil
