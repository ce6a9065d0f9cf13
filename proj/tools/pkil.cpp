#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <string>
#include <vector>

#include "pkil/baseline.hpp"
#include "pkil/embeddings.hpp"
#include "pkil/error.hpp"
#include "pkil/eval.hpp"
#include "pkil/io.hpp"
#include "pkil/kernels.hpp"
#include "pkil/model.hpp"
#include "pkil/synthetic.hpp"
#include "pkil/tree.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string config_hash(const json& effective) {
  const std::string dump = effective.dump();
  return pkil::to_hex(pkil::fnv1a(std::span<const char>(dump.data(), dump.size())));
}

std::string header_comment(const json& effective) {
  return std::string("# pkil ") + pkil::kToolVersion + " config=" + config_hash(effective) + "\n";
}

pkil::KernelSpec make_kernel(const std::string& kind, double sigma, int degree, double coef0) {
  pkil::KernelSpec spec;
  spec.kind = pkil::kernel_kind_from_name(kind);
  spec.sigma = sigma;
  spec.degree = degree;
  spec.coef0 = coef0;
  pkil::validate(spec);
  return spec;
}

// Posts for prediction: JSONL {"id","text"} records, or raw text lines.
struct InputPost {
  std::string id;
  std::string text;
};

std::vector<InputPost> read_posts_lenient(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pkil::Error("cannot open posts file: " + path);
  std::vector<InputPost> posts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line[first] == '{') {
      const json j = json::parse(line);
      posts.push_back({j.at("id").get<std::string>(), j.at("text").get<std::string>()});
    } else {
      posts.push_back({"line" + std::to_string(line_no), line});
    }
  }
  if (posts.empty()) throw pkil::Error("posts file has no records: " + path);
  return posts;
}

json explanation_to_json(const pkil::Explanation& expl) {
  json steps = json::array();
  for (const pkil::ExplanationStep& step : expl.steps) {
    steps.push_back({{"question_id", step.question_id},
                     {"question_text", step.question_text},
                     {"answer", pkil::answer_to_string(step.answer)},
                     {"kernel_value", step.kernel_value},
                     {"threshold", step.threshold},
                     {"fragment",
                      {{"text", step.best_fragment.text},
                       {"begin", step.best_fragment.begin},
                       {"end", step.best_fragment.end}}}});
  }
  json j = {{"label", expl.label},
            {"scores", expl.normalized_scores},
            {"fallback", expl.fallback},
            {"steps", std::move(steps)},
            {"rendering", pkil::render_explanation(expl)}};
  if (!expl.fallback) {
    j["leaf_id"] = expl.leaf_id;
    j["leaf_probability"] = expl.leaf_probability;
  }
  if (expl.fallback && !expl.closest_question_id.empty()) {
    j["closest_question_id"] = expl.closest_question_id;
  }
  return j;
}

struct SynthOpts {
  std::string tree_path;
  std::string out_dir;
  std::uint64_t seed = 1;
  int examples = 120;
  int annotators = 3;
  double noise = 0.0;
  int min_distractors = 1;
  int max_distractors = 3;
};

int run_synth(const SynthOpts& opt) {
  const pkil::ProcessTree tree = pkil::load_tree(opt.tree_path);
  pkil::SyntheticConfig config;
  config.n_examples = opt.examples;
  config.n_annotators = opt.annotators;
  config.label_noise = opt.noise;
  config.rng_seed = opt.seed;
  config.min_distractors = opt.min_distractors;
  config.max_distractors = opt.max_distractors;

  const auto dataset = pkil::generate_synthetic(config, tree);
  const auto corpus = pkil::build_corpus(dataset, tree);

  const json effective = {{"command", "synth"},       {"tree", opt.tree_path},
                          {"seed", opt.seed},         {"examples", opt.examples},
                          {"annotators", opt.annotators}, {"noise", opt.noise},
                          {"min_distractors", opt.min_distractors},
                          {"max_distractors", opt.max_distractors}};
  const std::string header = header_comment(effective);

  fs::create_directories(opt.out_dir);
  const fs::path out(opt.out_dir);
  pkil::save_posts(dataset, (out / "posts.jsonl").string(), header);
  pkil::save_annotations(dataset, (out / "annotations.jsonl").string(), header);
  pkil::save_lines(corpus, (out / "corpus.txt").string(), header);
  std::cout << "wrote " << dataset.size() << " examples to " << opt.out_dir << "\n";
  return 0;
}

struct TrainEmbeddingsOpts {
  std::string corpus_path;
  std::string out_path;
  std::uint64_t seed = 42;
  pkil::EmbeddingConfig config;
};

int run_train_embeddings(const TrainEmbeddingsOpts& opt) {
  pkil::EmbeddingConfig config = opt.config;
  config.rng_seed = opt.seed;
  const auto corpus = pkil::load_corpus(opt.corpus_path);
  const pkil::WordVectors vectors = pkil::train_cbow(corpus, config);

  const json effective = {{"command", "train-embeddings"},
                          {"corpus", opt.corpus_path},
                          {"seed", opt.seed},
                          {"dim", config.dim},
                          {"window", config.window},
                          {"negative_samples", config.negative_samples},
                          {"epochs", config.epochs},
                          {"learning_rate", config.learning_rate},
                          {"min_count", config.min_count}};
  std::ofstream out(opt.out_path);
  if (!out) throw pkil::Error("cannot write vector file: " + opt.out_path);
  out << header_comment(effective);
  pkil::save_vectors(vectors, out);
  std::cout << "trained " << vectors.size() << " vectors (dim " << vectors.dim << ") -> "
            << opt.out_path << "\n";
  return 0;
}

struct TrainOpts {
  std::string tree_path;
  std::string annotations_path;
  std::string posts_path;
  std::string vectors_path;
  std::string out_path;
  std::string kernel = "gaussian";
  double sigma = 1.0;
  int degree = 1;
  double coef0 = 0.0;
  double tau = 0.05;
  double epsilon = 1e-6;
  int iterations = 25;
  int fragment_window = 2;
  int max_tokens = 30;
};

int run_train(const TrainOpts& opt) {
  const pkil::ProcessTree tree = pkil::load_tree(opt.tree_path);
  const auto dataset = pkil::load_dataset(opt.posts_path, opt.annotations_path, tree);

  std::vector<pkil::AnnotationPath> paths;
  for (const auto& example : dataset) {
    for (const auto& path : example.annotations) paths.push_back(path);
  }

  pkil::TrainedModel model;
  model.tree = tree;
  model.leaf_probs = pkil::estimate_leaf_probabilities(paths, tree);
  model.kernel = make_kernel(opt.kernel, opt.sigma, opt.degree, opt.coef0);
  model.thresholds = pkil::init_thresholds(tree, model.kernel);
  model.vectors = std::make_shared<pkil::WordVectors>(pkil::load_vectors_file(opt.vectors_path));
  model.max_tokens = opt.max_tokens;
  model.fragment_window = opt.fragment_window;
  model.finalize();

  std::vector<pkil::TrainExample> examples;
  examples.reserve(dataset.size());
  for (const auto& example : dataset) {
    examples.push_back({pkil::analyze_post(example.text, model).reps, example.label});
  }

  const pkil::SoftConfig soft{opt.tau, opt.epsilon};
  const pkil::NewtonResult result = pkil::train_newton(examples, model, opt.iterations, soft);
  model.thresholds = result.thresholds;
  for (std::size_t k = 0; k < result.trajectory.size(); ++k) {
    std::printf("iteration %zu loss %.12g\n", k + 1, result.trajectory[k]);
  }

  const json effective = {{"command", "train"},
                          {"tree", opt.tree_path},
                          {"annotations", opt.annotations_path},
                          {"posts", opt.posts_path},
                          {"vectors", opt.vectors_path},
                          {"kernel", opt.kernel},
                          {"sigma", opt.sigma},
                          {"degree", opt.degree},
                          {"coef0", opt.coef0},
                          {"tau", opt.tau},
                          {"epsilon", opt.epsilon},
                          {"iterations", opt.iterations},
                          {"fragment_window", opt.fragment_window},
                          {"max_tokens", opt.max_tokens}};
  pkil::save_model(model, soft, opt.vectors_path, opt.out_path, config_hash(effective));
  std::cout << "model written to " << opt.out_path << "\n";
  return 0;
}

struct PredictOpts {
  std::string model_path;
  std::string posts_path;
  std::string out_path;  // optional
  bool explain = false;
};

int run_predict(const PredictOpts& opt) {
  const pkil::LoadedModel loaded = pkil::load_model(opt.model_path);
  const auto posts = read_posts_lenient(opt.posts_path);

  const json effective = {{"command", opt.explain ? "explain" : "predict"},
                          {"model", opt.model_path},
                          {"posts", opt.posts_path}};
  std::unique_ptr<std::ofstream> file;
  if (!opt.out_path.empty()) {
    file = std::make_unique<std::ofstream>(opt.out_path);
    if (!*file) throw pkil::Error("cannot write output file: " + opt.out_path);
    *file << header_comment(effective);
  }

  for (const InputPost& post : posts) {
    json record;
    if (opt.explain) {
      const pkil::Explanation expl = pkil::explain(post.text, loaded.model);
      record = explanation_to_json(expl);
      record["id"] = post.id;
      std::cout << post.id << ": " << pkil::render_explanation(expl) << "\n";
    } else {
      const pkil::PredictResult pred = pkil::predict(post.text, loaded.model);
      record = {{"id", post.id},
                {"label", pred.label},
                {"scores", pred.normalized_scores},
                {"fallback", pred.fallback}};
      std::cout << record.dump() << "\n";
    }
    if (file) *file << record.dump() << "\n";
  }
  return 0;
}

struct EvalOpts {
  std::string tree_path;
  std::string annotations_path;
  std::string posts_path;
  std::string corpus_path;   // train CBOW vectors when given
  std::string vectors_path;  // preloaded vectors when given
  std::string out_dir;
  std::uint64_t seed = 7;
  double split = 0.8;
  int repeats = 1;
  int iterations = 25;
  double sigma = 1.0;
  double tau = 0.05;
  int fragment_window = 2;
  int max_tokens = 30;
  pkil::EmbeddingConfig embedding;
  int baseline_positions = 60;
  int baseline_epochs = 500;
  double baseline_lr = 0.1;
};

int run_eval(const EvalOpts& opt) {
  if (opt.corpus_path.empty() && opt.vectors_path.empty()) {
    throw pkil::Error("eval needs --corpus (to train CBOW vectors) or --vectors (to load them)");
  }
  const pkil::ProcessTree tree = pkil::load_tree(opt.tree_path);
  const auto dataset = pkil::load_dataset(opt.posts_path, opt.annotations_path, tree);

  std::vector<pkil::EmbeddingSource> sources;
  if (!opt.corpus_path.empty()) {
    pkil::EmbeddingConfig config = opt.embedding;
    config.rng_seed = opt.seed;
    const auto corpus = pkil::load_corpus(opt.corpus_path);
    sources.push_back(
        {"cbow", std::make_shared<pkil::WordVectors>(pkil::train_cbow(corpus, config))});
  }
  if (!opt.vectors_path.empty()) {
    sources.push_back(
        {"loaded", std::make_shared<pkil::WordVectors>(pkil::load_vectors_file(opt.vectors_path))});
  }

  pkil::ComparisonConfig config;
  config.split = opt.split;
  config.seed = opt.seed;
  config.repeats = opt.repeats;
  config.newton_iterations = opt.iterations;
  config.fragment_window = opt.fragment_window;
  config.max_tokens = opt.max_tokens;
  config.gaussian_sigma = opt.sigma;
  config.soft.tau = opt.tau;
  config.baseline.max_positions = opt.baseline_positions;
  config.baseline.epochs = opt.baseline_epochs;
  config.baseline.learning_rate = opt.baseline_lr;

  const pkil::ComparisonTable table = pkil::run_comparison(dataset, tree, sources, config);

  const json effective = {{"command", "eval"},
                          {"tree", opt.tree_path},
                          {"annotations", opt.annotations_path},
                          {"posts", opt.posts_path},
                          {"corpus", opt.corpus_path},
                          {"vectors", opt.vectors_path},
                          {"seed", opt.seed},
                          {"split", opt.split},
                          {"repeats", opt.repeats},
                          {"iterations", opt.iterations},
                          {"sigma", opt.sigma},
                          {"tau", opt.tau}};
  const std::string header = header_comment(effective);

  fs::create_directories(opt.out_dir);
  const fs::path out(opt.out_dir);
  {
    std::ofstream tsv(out / "comparison.tsv");
    if (!tsv) throw pkil::Error("cannot write comparison.tsv");
    tsv << header << pkil::comparison_tsv(table);
    std::ofstream txt(out / "comparison.txt");
    if (!txt) throw pkil::Error("cannot write comparison.txt");
    txt << header << pkil::comparison_text(table);
  }
  std::cout << pkil::comparison_text(table);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PK-iL: process-knowledge-infused text classification"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Read option defaults from an INI/TOML file");

  SynthOpts synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic annotated dataset");
  synth_cmd->add_option("--tree", synth.tree_path, "Process tree JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  synth_cmd->add_option("--out", synth.out_dir, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.seed, "RNG seed");
  synth_cmd->add_option("--examples", synth.examples, "Number of examples");
  synth_cmd->add_option("--annotators", synth.annotators, "Annotators per example");
  synth_cmd->add_option("--noise", synth.noise, "Annotator diversion probability");
  synth_cmd->add_option("--min-distractors", synth.min_distractors, "Min distractor sentences");
  synth_cmd->add_option("--max-distractors", synth.max_distractors, "Max distractor sentences");

  TrainEmbeddingsOpts emb;
  CLI::App* emb_cmd = app.add_subcommand("train-embeddings", "Train CBOW word vectors");
  emb_cmd->add_option("--corpus", emb.corpus_path, "Corpus file, one post per line")
      ->required()
      ->check(CLI::ExistingFile);
  emb_cmd->add_option("--out", emb.out_path, "Output vector file")->required();
  emb_cmd->add_option("--seed", emb.seed, "RNG seed");
  emb_cmd->add_option("--dim", emb.config.dim, "Vector dimension");
  emb_cmd->add_option("--window", emb.config.window, "Context window");
  emb_cmd->add_option("--negative", emb.config.negative_samples, "Negative samples");
  emb_cmd->add_option("--epochs", emb.config.epochs, "Training epochs");
  emb_cmd->add_option("--lr", emb.config.learning_rate, "Initial learning rate");
  emb_cmd->add_option("--min-count", emb.config.min_count, "Minimum token frequency");

  TrainOpts train;
  CLI::App* train_cmd = app.add_subcommand("train", "Train PK-iL thresholds");
  train_cmd->add_option("--tree", train.tree_path, "Process tree JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--annotations", train.annotations_path, "Annotations JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--posts", train.posts_path, "Posts JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--vectors", train.vectors_path, "Word-vector file")
      ->required()
      ->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train.out_path, "Output model artifact")->required();
  train_cmd->add_option("--kernel", train.kernel, "cosine | polynomial | gaussian");
  train_cmd->add_option("--sigma", train.sigma, "Gaussian bandwidth");
  train_cmd->add_option("--degree", train.degree, "Polynomial degree");
  train_cmd->add_option("--coef0", train.coef0, "Polynomial bias");
  train_cmd->add_option("--tau", train.tau, "Soft indicator temperature");
  train_cmd->add_option("--epsilon", train.epsilon, "Probability clamp");
  train_cmd->add_option("--iterations", train.iterations, "Newton sweeps");
  train_cmd->add_option("--window", train.fragment_window, "Fragment window (sentences)");
  train_cmd->add_option("--max-tokens", train.max_tokens, "Tokens per fragment (M)");

  PredictOpts predict;
  CLI::App* predict_cmd = app.add_subcommand("predict", "Predict labels for posts");
  predict_cmd->add_option("--model", predict.model_path, "Model artifact")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--posts", predict.posts_path, "Posts file (JSONL or raw lines)")
      ->required()
      ->check(CLI::ExistingFile);
  predict_cmd->add_option("--out", predict.out_path, "Output records file");

  PredictOpts explain;
  explain.explain = true;
  CLI::App* explain_cmd = app.add_subcommand("explain", "Explain predictions for posts");
  explain_cmd->add_option("--model", explain.model_path, "Model artifact")
      ->required()
      ->check(CLI::ExistingFile);
  explain_cmd->add_option("--posts", explain.posts_path, "Posts file (JSONL or raw lines)")
      ->required()
      ->check(CLI::ExistingFile);
  explain_cmd->add_option("--out", explain.out_path, "Output records file");

  EvalOpts eval;
  CLI::App* eval_cmd =
      app.add_subcommand("eval", "Baseline vs PK-iL comparison on a train/test split");
  eval_cmd->add_option("--tree", eval.tree_path, "Process tree JSON file")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--annotations", eval.annotations_path, "Annotations JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--posts", eval.posts_path, "Posts JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--corpus", eval.corpus_path, "Corpus to train CBOW vectors on")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--vectors", eval.vectors_path, "Pre-trained vector file")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval.out_dir, "Output directory")->required();
  eval_cmd->add_option("--seed", eval.seed, "RNG seed");
  eval_cmd->add_option("--split", eval.split, "Train fraction");
  eval_cmd->add_option("--repeats", eval.repeats, "Rerun count, metrics averaged");
  eval_cmd->add_option("--iterations", eval.iterations, "Newton sweeps");
  eval_cmd->add_option("--sigma", eval.sigma, "Gaussian bandwidth");
  eval_cmd->add_option("--tau", eval.tau, "Soft indicator temperature");
  eval_cmd->add_option("--window", eval.fragment_window, "Fragment window (sentences)");
  eval_cmd->add_option("--max-tokens", eval.max_tokens, "Tokens per fragment (M)");
  eval_cmd->add_option("--dim", eval.embedding.dim, "CBOW dimension");
  eval_cmd->add_option("--epochs", eval.embedding.epochs, "CBOW epochs");
  eval_cmd->add_option("--min-count", eval.embedding.min_count, "CBOW min token frequency");
  eval_cmd->add_option("--positions", eval.baseline_positions, "Baseline token positions (P)");
  eval_cmd->add_option("--baseline-epochs", eval.baseline_epochs, "Baseline GD epochs");
  eval_cmd->add_option("--baseline-lr", eval.baseline_lr, "Baseline learning rate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(synth_cmd)) return run_synth(synth);
    if (app.got_subcommand(emb_cmd)) return run_train_embeddings(emb);
    if (app.got_subcommand(train_cmd)) return run_train(train);
    if (app.got_subcommand(predict_cmd)) return run_predict(predict);
    if (app.got_subcommand(explain_cmd)) return run_predict(explain);
    if (app.got_subcommand(eval_cmd)) return run_eval(eval);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
