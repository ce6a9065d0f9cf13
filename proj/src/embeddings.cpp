#include "pkil/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "pkil/error.hpp"

namespace pkil {

void validate(const EmbeddingConfig& config) {
  if (config.dim < 1) throw Error("embedding dim must be >= 1");
  if (config.window < 1) throw Error("embedding window must be >= 1");
  if (config.negative_samples < 1) throw Error("negative_samples must be >= 1");
  if (config.epochs < 1) throw Error("epochs must be >= 1");
  if (!(config.learning_rate > 0.0)) throw Error("learning_rate must be > 0");
  if (config.min_count < 1) throw Error("min_count must be >= 1");
  if (config.max_tokens < 1) throw Error("max_tokens must be >= 1");
}

std::vector<std::string> WordVectors::sorted_tokens() const {
  std::vector<std::string> tokens;
  tokens.reserve(table.size());
  for (const auto& [token, vec] : table) tokens.push_back(token);
  std::sort(tokens.begin(), tokens.end());
  return tokens;
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Vocab {
  std::vector<std::string> words;                     // index -> word
  std::vector<std::int64_t> counts;                   // index -> frequency
  std::unordered_map<std::string, int> index;         // word -> index
};

Vocab build_vocab(std::span<const std::vector<std::string>> corpus, int min_count) {
  std::unordered_map<std::string, std::int64_t> freq;
  for (const auto& sentence : corpus) {
    for (const auto& token : sentence) ++freq[token];
  }
  std::vector<std::pair<std::string, std::int64_t>> kept;
  for (auto& [token, count] : freq) {
    if (count >= min_count) kept.emplace_back(token, count);
  }
  // Frequency-descending, token-ascending: a stable order independent of
  // hash-map iteration, so training is reproducible.
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocab vocab;
  for (auto& [token, count] : kept) {
    vocab.index.emplace(token, static_cast<int>(vocab.words.size()));
    vocab.words.push_back(token);
    vocab.counts.push_back(count);
  }
  return vocab;
}

}  // namespace

WordVectors train_cbow(std::span<const std::vector<std::string>> corpus,
                       const EmbeddingConfig& config) {
  validate(config);
  if (corpus.empty()) throw Error("train_cbow: empty corpus");

  const Vocab vocab = build_vocab(corpus, config.min_count);
  const int vocab_size = static_cast<int>(vocab.words.size());
  if (vocab_size == 0) throw Error("train_cbow: vocabulary empty after min_count filtering");

  const int dim = config.dim;
  std::mt19937 rng(static_cast<std::uint32_t>(config.rng_seed));

  Eigen::MatrixXd input(dim, vocab_size);    // word vectors (the output of training)
  Eigen::MatrixXd context(dim, vocab_size);  // negative-sampling output weights
  {
    std::uniform_real_distribution<double> init(-0.5 / dim, 0.5 / dim);
    for (int w = 0; w < vocab_size; ++w) {
      for (int i = 0; i < dim; ++i) input(i, w) = init(rng);
    }
    context.setZero();
  }

  // Unigram^0.75 cumulative distribution for negative sampling.
  std::vector<double> cumulative(vocab_size);
  {
    double acc = 0.0;
    for (int w = 0; w < vocab_size; ++w) {
      acc += std::pow(static_cast<double>(vocab.counts[w]), 0.75);
      cumulative[w] = acc;
    }
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto sample_negative = [&]() {
    const double u = unit(rng) * cumulative.back();
    const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
    return static_cast<int>(it - cumulative.begin());
  };

  // Sentences restricted to in-vocabulary tokens.
  std::vector<std::vector<int>> stream;
  std::int64_t total_words = 0;
  for (const auto& sentence : corpus) {
    std::vector<int> ids;
    for (const auto& token : sentence) {
      auto it = vocab.index.find(token);
      if (it != vocab.index.end()) ids.push_back(it->second);
    }
    total_words += static_cast<std::int64_t>(ids.size());
    if (!ids.empty()) stream.push_back(std::move(ids));
  }
  if (total_words == 0) throw Error("train_cbow: no in-vocabulary tokens in corpus");

  const std::int64_t schedule = static_cast<std::int64_t>(config.epochs) * total_words;
  std::int64_t processed = 0;
  Eigen::VectorXd hidden(dim), hidden_grad(dim);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& sentence : stream) {
      const int len = static_cast<int>(sentence.size());
      for (int pos = 0; pos < len; ++pos, ++processed) {
        const double progress = static_cast<double>(processed) / static_cast<double>(schedule);
        const double alpha = config.learning_rate * std::max(1.0 - progress, 1e-4);

        // Dynamic window: effective half-size in [1, window].
        const int half = 1 + static_cast<int>(rng() % static_cast<unsigned>(config.window));
        const int lo = std::max(0, pos - half);
        const int hi = std::min(len - 1, pos + half);
        const int context_size = hi - lo + 1 - 1;
        if (context_size <= 0) continue;

        hidden.setZero();
        for (int j = lo; j <= hi; ++j) {
          if (j != pos) hidden += input.col(sentence[j]);
        }
        hidden /= static_cast<double>(context_size);

        hidden_grad.setZero();
        const int center = sentence[pos];
        for (int s = 0; s <= config.negative_samples; ++s) {
          int target;
          double label;
          if (s == 0) {
            target = center;
            label = 1.0;
          } else {
            target = sample_negative();
            if (target == center) continue;
            label = 0.0;
          }
          const double score = sigmoid(hidden.dot(context.col(target)));
          const double g = (label - score) * alpha;
          hidden_grad += g * context.col(target);
          context.col(target) += g * hidden;
        }
        for (int j = lo; j <= hi; ++j) {
          if (j != pos) input.col(sentence[j]) += hidden_grad;
        }
      }
    }
  }

  WordVectors out;
  out.dim = dim;
  out.table.reserve(vocab_size);
  for (int w = 0; w < vocab_size; ++w) {
    out.table.emplace(vocab.words[w], input.col(w));
    out.max_token_length = std::max(out.max_token_length, vocab.words[w].size());
  }
  return out;
}

WordVectors load_vectors(std::istream& in) {
  WordVectors out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream row(line);
    std::string token;
    row >> token;
    std::vector<double> values;
    double v;
    while (row >> v) values.push_back(v);
    if (!row.eof()) {
      throw Error("vector file line " + std::to_string(line_no) + ": unparsable number");
    }
    if (values.empty()) {
      throw Error("vector file line " + std::to_string(line_no) + ": no values for token \"" +
                  token + "\"");
    }
    if (out.dim == 0) {
      out.dim = static_cast<int>(values.size());
    } else if (static_cast<int>(values.size()) != out.dim) {
      throw Error("vector file line " + std::to_string(line_no) + ": expected " +
                  std::to_string(out.dim) + " values, got " + std::to_string(values.size()));
    }
    if (out.contains(token)) {
      throw Error("vector file line " + std::to_string(line_no) + ": duplicate token \"" + token +
                  "\"");
    }
    out.table.emplace(token, Eigen::Map<Eigen::VectorXd>(values.data(),
                                                         static_cast<Eigen::Index>(values.size())));
    out.max_token_length = std::max(out.max_token_length, token.size());
  }
  if (out.table.empty()) throw Error("vector file has an empty vocabulary");
  return out;
}

WordVectors load_vectors_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open vector file: " + path);
  return load_vectors(in);
}

void save_vectors(const WordVectors& vectors, std::ostream& out) {
  char buf[64];
  for (const std::string& token : vectors.sorted_tokens()) {
    out << token;
    const Eigen::VectorXd& vec = vectors.table.at(token);
    for (Eigen::Index i = 0; i < vec.size(); ++i) {
      std::snprintf(buf, sizeof(buf), " %.17g", vec[i]);
      out << buf;
    }
    out << '\n';
  }
}

void save_vectors_file(const WordVectors& vectors, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write vector file: " + path);
  save_vectors(vectors, out);
}

Eigen::VectorXd lookup(const std::string& token, const WordVectors& vectors) {
  auto it = vectors.table.find(token);
  if (it != vectors.table.end()) return it->second;

  // Greedy letter-chunking for out-of-vocabulary tokens.
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(vectors.dim);
  int matches = 0;
  std::size_t pos = 0;
  while (pos < token.size()) {
    const std::size_t longest = std::min(vectors.max_token_length, token.size() - pos);
    std::size_t taken = 0;
    for (std::size_t len = longest; len >= 1; --len) {
      auto hit = vectors.table.find(token.substr(pos, len));
      if (hit != vectors.table.end()) {
        sum += hit->second;
        ++matches;
        taken = len;
        break;
      }
    }
    pos += taken > 0 ? taken : 1;
  }
  if (matches == 0) return Eigen::VectorXd::Zero(vectors.dim);
  return sum / static_cast<double>(matches);
}

FragmentRepresentation embed_tokens(std::span<const std::string> tokens,
                                    const WordVectors& vectors, int max_tokens) {
  if (max_tokens < 1) throw Error("embed: max_tokens must be >= 1");
  const int dim = vectors.dim;
  FragmentRepresentation rep;
  rep.vector = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(max_tokens) * dim);
  const std::size_t count = std::min(tokens.size(), static_cast<std::size_t>(max_tokens));
  for (std::size_t p = 0; p < count; ++p) {
    rep.vector.segment(static_cast<Eigen::Index>(p) * dim, dim) = lookup(tokens[p], vectors);
  }
  rep.norm = rep.vector.norm();
  if (rep.norm > 0.0) rep.vector /= rep.norm;
  return rep;
}

FragmentRepresentation embed_fragment(const Fragment& fragment,
                                      const WordVectors& vectors, int max_tokens) {
  return embed_tokens(fragment.tokens, vectors, max_tokens);
}

FragmentRepresentation embed_text(const std::string& sentence,
                                  const WordVectors& vectors, int max_tokens) {
  return embed_tokens(tokenize(sentence), vectors, max_tokens);
}

}  // namespace pkil
