#include "pkil/synthetic.hpp"

#include <algorithm>
#include <random>

#include "pkil/error.hpp"

namespace pkil {

void validate(const SyntheticConfig& config) {
  if (config.n_examples < 1) throw Error("synthetic: n_examples must be >= 1");
  if (config.n_annotators < 1) throw Error("synthetic: n_annotators must be >= 1");
  if (config.label_noise < 0.0 || config.label_noise > 1.0) {
    throw Error("synthetic: label_noise must be in [0, 1]");
  }
  if (config.min_distractors < 0 || config.max_distractors < config.min_distractors) {
    throw Error("synthetic: bad distractor range");
  }
}

namespace {

const std::vector<std::string> kFiller = {
    "today",   "morning", "coffee", "walked",  "around", "garden",
    "weather", "quiet",   "reading", "music",  "later",  "dinner",
    "friends", "watched", "movie",   "slept",  "early",  "woke",
    "tired",   "work",    "busy",    "traffic", "lunch", "sunny"};

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Pronounceable deterministic word for auto-generated themes.
std::string make_word(std::mt19937& rng) {
  static const std::string consonants = "bcdfgklmnprstvz";
  static const std::string vowels = "aeiou";
  const int syllables = 2 + static_cast<int>(rng() % 2);
  std::string word;
  for (int s = 0; s < syllables; ++s) {
    word += consonants[rng() % consonants.size()];
    word += vowels[rng() % vowels.size()];
  }
  return word;
}

std::vector<std::string> auto_theme(const std::string& question_id, std::uint64_t seed) {
  std::mt19937 rng(static_cast<std::uint32_t>(fnv1a(question_id) ^ seed));
  std::vector<std::string> words;
  for (int i = 0; i < 4; ++i) words.push_back(make_word(rng));
  return words;
}

std::string pick(const std::vector<std::string>& words, std::mt19937& rng) {
  return words[rng() % words.size()];
}

std::string distractor_sentence(std::mt19937& rng) {
  const int len = 4 + static_cast<int>(rng() % 4);
  std::string s;
  for (int i = 0; i < len; ++i) {
    if (i) s += ' ';
    s += pick(kFiller, rng);
  }
  s += '.';
  return s;
}

}  // namespace

std::vector<AnnotatedExample> generate_synthetic(const SyntheticConfig& config,
                                                 const ProcessTree& tree) {
  validate(config);
  std::mt19937 rng(static_cast<std::uint32_t>(config.rng_seed));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::vector<SignedPath> paths = enumerate_signed_paths(tree);

  // Theme words per question: configured, or generated from the id.
  std::map<std::string, std::vector<std::string>> themes = config.themes;
  for (const auto& [qid, q] : tree.questions) {
    if (!themes.count(qid) || themes.at(qid).empty()) {
      themes[qid] = auto_theme(qid, config.rng_seed);
    }
  }

  // Declared sub-question ids per main question, for path realism.
  std::map<std::string, std::vector<std::string>> subs;
  for (const auto& [sub, parent] : tree.sub_questions) subs[parent].push_back(sub);

  std::vector<AnnotatedExample> out;
  out.reserve(static_cast<std::size_t>(config.n_examples));

  for (int e = 0; e < config.n_examples; ++e) {
    const SignedPath& path = paths[rng() % paths.size()];

    AnnotatedExample example;
    example.id = "ex" + std::to_string(e);
    example.label = path.label;
    example.leaf_id = path.leaf_id;

    // Question-echo sentences for every yes step, then distractors,
    // shuffled into reading order.
    std::vector<std::string> sentences;
    for (const auto& [qid, sign] : path.steps) {
      if (sign <= 0) continue;
      const int copies = 1 + static_cast<int>(rng() % 2);
      for (int c = 0; c < copies; ++c) {
        std::string s = tree.question(qid).text;
        const int tails = 1 + static_cast<int>(rng() % 2);
        for (int t = 0; t < tails; ++t) {
          s += ' ';
          s += pick(themes.at(qid), rng);
        }
        s += '.';
        sentences.push_back(std::move(s));
      }
    }
    const int distractors =
        config.min_distractors +
        (config.max_distractors > config.min_distractors
             ? static_cast<int>(rng() % static_cast<unsigned>(config.max_distractors -
                                                              config.min_distractors + 1))
             : 0);
    for (int d = 0; d < distractors; ++d) sentences.push_back(distractor_sentence(rng));
    std::shuffle(sentences.begin(), sentences.end(), rng);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (i) example.text += ' ';
      example.text += sentences[i];
    }

    // Annotator paths: exact with probability 1 - noise, otherwise the
    // answer at a random step is flipped and the walk continues randomly.
    for (int a = 0; a < config.n_annotators; ++a) {
      std::vector<std::pair<std::string, Answer>> steps;
      if (config.label_noise > 0.0 && unit(rng) < config.label_noise && !path.steps.empty()) {
        const std::size_t divert = rng() % path.steps.size();
        NodeRef node = tree.root;
        for (std::size_t i = 0; i < divert; ++i) {
          const auto& [qid, sign] = path.steps[i];
          steps.emplace_back(qid, sign > 0 ? Answer::yes : Answer::no);
          const Question& q = tree.question(qid);
          node = sign > 0 ? q.yes_edge : q.no_edge;
        }
        // flipped answer at the diversion step, random answers after
        {
          const auto& [qid, sign] = path.steps[divert];
          const Answer flipped = sign > 0 ? Answer::no : Answer::yes;
          steps.emplace_back(qid, flipped);
          const Question& q = tree.question(qid);
          node = flipped == Answer::yes ? q.yes_edge : q.no_edge;
        }
        while (node.is_question()) {
          const Question& q = tree.question(node.id);
          const Answer ans = (rng() % 2) ? Answer::yes : Answer::no;
          steps.emplace_back(node.id, ans);
          node = ans == Answer::yes ? q.yes_edge : q.no_edge;
        }
      } else {
        for (const auto& [qid, sign] : path.steps) {
          steps.emplace_back(qid, sign > 0 ? Answer::yes : Answer::no);
        }
      }

      if (config.use_sub_question_ids) {
        for (auto& [qid, answer] : steps) {
          auto it = subs.find(qid);
          if (it != subs.end() && (rng() % 2)) qid = it->second[rng() % it->second.size()];
        }
      }

      AnnotationPath annotation;
      annotation.example_id = example.id;
      annotation.annotator_id = "a" + std::to_string(a);
      annotation.steps = std::move(steps);
      example.annotations.push_back(std::move(annotation));
    }
    out.push_back(std::move(example));
  }
  return out;
}

std::vector<std::string> build_corpus(std::span<const AnnotatedExample> dataset,
                                      const ProcessTree& tree) {
  std::vector<std::string> lines;
  lines.reserve(dataset.size() + tree.questions.size() * 3);
  for (const AnnotatedExample& example : dataset) lines.push_back(example.text);
  for (const auto& [qid, q] : tree.questions) {
    for (int i = 0; i < 3; ++i) lines.push_back(q.text);
  }
  return lines;
}

}  // namespace pkil
