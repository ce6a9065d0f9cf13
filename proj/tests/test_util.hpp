#pragma once

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "pkil/embeddings.hpp"
#include "pkil/kernels.hpp"
#include "pkil/model.hpp"
#include "pkil/tree.hpp"

namespace testutil {

inline std::string data_path(const std::string& name) {
  return std::string(PKIL_SOURCE_DIR) + "/data/" + name;
}

inline Eigen::VectorXd random_unit(std::mt19937& rng, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = normal(rng);
  const double norm = v.norm();
  return norm > 0 ? Eigen::VectorXd(v / norm) : Eigen::VectorXd::Unit(dim, 0);
}

inline pkil::FragmentRepresentation unit_rep(Eigen::VectorXd v) {
  pkil::FragmentRepresentation rep;
  rep.norm = v.norm();
  rep.vector = rep.norm > 0 ? Eigen::VectorXd(v / rep.norm) : v;
  return rep;
}

/// Fragment representation with a chosen cosine similarity against the
/// first axis (useful with q_rep = e_0).
inline pkil::FragmentRepresentation rep_with_cosine(double cosine, int dim = 4) {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim);
  v[0] = cosine;
  v[1] = std::sqrt(std::max(0.0, 1.0 - cosine * cosine));
  return unit_rep(v);
}

/// Random binary tree over question ids q1..qn with labels cycling through
/// `labels`; the structure (which questions sit on which branch) is drawn
/// from rng.
inline pkil::ProcessTree random_tree(std::mt19937& rng, int n_questions,
                                     const std::vector<std::string>& labels) {
  pkil::ProcessTree tree;
  int leaf_counter = 0;

  // Builds a subtree from the given question ids, returns its root ref.
  std::function<pkil::NodeRef(std::vector<std::string>)> build =
      [&](std::vector<std::string> ids) -> pkil::NodeRef {
    if (ids.empty()) {
      const std::string id = "L" + std::to_string(leaf_counter);
      tree.leaves.emplace(id,
                          pkil::Leaf{id, labels[leaf_counter % labels.size()]});
      ++leaf_counter;
      return pkil::NodeRef::leaf(id);
    }
    const std::string root_id = ids.front();
    ids.erase(ids.begin());
    const std::size_t split = ids.empty() ? 0 : rng() % (ids.size() + 1);
    std::vector<std::string> yes_ids(ids.begin(), ids.begin() + static_cast<long>(split));
    std::vector<std::string> no_ids(ids.begin() + static_cast<long>(split), ids.end());
    pkil::Question q;
    q.id = root_id;
    q.text = "question " + root_id;
    q.yes_edge = build(std::move(yes_ids));
    q.no_edge = build(std::move(no_ids));
    tree.questions.emplace(root_id, std::move(q));
    return pkil::NodeRef::question(root_id);
  };

  std::vector<std::string> ids;
  for (int i = 1; i <= n_questions; ++i) ids.push_back("q" + std::to_string(i));
  tree.root = build(std::move(ids));
  return tree;
}

/// A randomized (tree, thresholds, post) triple over hand-made unit-vector
/// representations: model plus the post's fragment representations.
struct RandomTriple {
  pkil::TrainedModel model;
  std::vector<pkil::FragmentRepresentation> post;
};

inline RandomTriple random_triple(std::mt19937& rng, const pkil::KernelSpec& kernel,
                                  int rep_dim = 16) {
  RandomTriple triple;
  const int n_questions = 1 + static_cast<int>(rng() % 5);
  triple.model.tree = random_tree(rng, n_questions, {"A", "B", "C"});
  triple.model.kernel = kernel;

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const auto& [id, leaf] : triple.model.tree.leaves) {
    triple.model.leaf_probs.values[id] = unit(rng);
  }
  const auto [lo, hi] = pkil::kernel_range(kernel);
  std::map<std::string, pkil::FragmentRepresentation> reps;
  for (const auto& [id, q] : triple.model.tree.questions) {
    triple.model.thresholds.values[id] = lo + unit(rng) * (hi - lo);
    reps.emplace(id, unit_rep(random_unit(rng, rep_dim)));
  }
  triple.model.finalize_with_reps(std::move(reps));

  const int n_fragments = static_cast<int>(rng() % 7);  // may be zero
  for (int f = 0; f < n_fragments; ++f) {
    if (n_questions > 0 && rng() % 3 == 0) {
      // a fragment near some question's representation
      auto it = triple.model.question_reps.begin();
      std::advance(it, rng() % triple.model.question_reps.size());
      Eigen::VectorXd v = it->second.vector + 0.3 * random_unit(rng, rep_dim);
      triple.post.push_back(unit_rep(std::move(v)));
    } else {
      triple.post.push_back(unit_rep(random_unit(rng, rep_dim)));
    }
  }
  return triple;
}

/// Number of fully satisfied signed paths under hard (tree-walk) semantics.
inline int satisfied_path_count(const RandomTriple& triple) {
  int count = 0;
  for (const pkil::SignedPath& path : triple.model.paths) {
    bool ok = true;
    for (const auto& [qid, sign] : path.steps) {
      const double theta = triple.model.thresholds.at(qid);
      const double best =
          pkil::best_kernel(triple.post, triple.model.question_reps.at(qid), triple.model.kernel);
      const bool step = triple.post.empty()
                            ? false
                            : (sign > 0 ? best >= theta : best <= theta);
      if (!step) {
        ok = false;
        break;
      }
    }
    if (ok) ++count;
  }
  return count;
}

}  // namespace testutil
