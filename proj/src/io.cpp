#include "pkil/io.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "pkil/error.hpp"
#include "pkil/text.hpp"

namespace pkil {

using nlohmann::json;

std::uint64_t fnv1a(std::span<const char> bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file for checksum: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  return fnv1a(std::span<const char>(bytes.data(), bytes.size()));
}

std::string to_hex(std::uint64_t value) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

bool is_comment_or_blank(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

json parse_line(const std::string& line, const std::string& path, std::size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw Error(path + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
  }
}

}  // namespace

std::vector<AnnotatedExample> load_posts(const std::string& path) {
  std::vector<AnnotatedExample> dataset;
  std::size_t line_no = 0;
  for (const std::string& line : read_lines(path)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const json j = parse_line(line, path, line_no);
    AnnotatedExample example;
    example.id = j.at("id").get<std::string>();
    example.text = j.at("text").get<std::string>();
    dataset.push_back(std::move(example));
  }
  if (dataset.empty()) throw Error("posts file has no records: " + path);
  return dataset;
}

void load_annotations(const std::string& path, std::vector<AnnotatedExample>& dataset) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < dataset.size(); ++i) index[dataset[i].id] = i;

  std::size_t line_no = 0;
  for (const std::string& line : read_lines(path)) {
    ++line_no;
    if (is_comment_or_blank(line)) continue;
    const json j = parse_line(line, path, line_no);
    const std::string example_id = j.at("example_id").get<std::string>();
    auto it = index.find(example_id);
    if (it == index.end()) {
      throw Error(path + ":" + std::to_string(line_no) + ": unknown example \"" + example_id +
                  "\"");
    }
    AnnotatedExample& example = dataset[it->second];

    const std::string label = j.at("label").get<std::string>();
    if (!example.annotations.empty() && example.label != label) {
      throw Error(path + ":" + std::to_string(line_no) + ": conflicting label for example \"" +
                  example_id + "\"");
    }
    example.label = label;

    AnnotationPath annotation;
    annotation.example_id = example_id;
    annotation.annotator_id = j.at("annotator_id").get<std::string>();
    for (const json& step : j.at("steps")) {
      annotation.steps.emplace_back(step.at("q").get<std::string>(),
                                    answer_from_string(step.at("a").get<std::string>()));
    }
    example.annotations.push_back(std::move(annotation));
  }
}

std::vector<AnnotatedExample> load_dataset(const std::string& posts_path,
                                           const std::string& annotations_path,
                                           const ProcessTree& tree) {
  std::vector<AnnotatedExample> dataset = load_posts(posts_path);
  load_annotations(annotations_path, dataset);
  for (AnnotatedExample& example : dataset) {
    if (example.annotations.empty()) {
      throw Error("example \"" + example.id + "\" has no annotations");
    }
    for (AnnotationPath& path : example.annotations) {
      path = canonicalize_path(path, tree);
    }
  }
  return dataset;
}

void save_posts(std::span<const AnnotatedExample> dataset, const std::string& path,
                const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << header_comment;
  for (const AnnotatedExample& example : dataset) {
    out << json{{"id", example.id}, {"text", example.text}}.dump() << '\n';
  }
}

void save_annotations(std::span<const AnnotatedExample> dataset, const std::string& path,
                      const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << header_comment;
  for (const AnnotatedExample& example : dataset) {
    for (const AnnotationPath& annotation : example.annotations) {
      json steps = json::array();
      for (const auto& [q, a] : annotation.steps) {
        steps.push_back({{"q", q}, {"a", answer_to_string(a)}});
      }
      out << json{{"example_id", example.id},
                  {"annotator_id", annotation.annotator_id},
                  {"steps", std::move(steps)},
                  {"label", example.label}}
                 .dump()
          << '\n';
    }
  }
}

void save_lines(std::span<const std::string> lines, const std::string& path,
                const std::string& header_comment) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << header_comment;
  for (const std::string& line : lines) out << line << '\n';
}

std::vector<std::vector<std::string>> load_corpus(const std::string& path) {
  std::vector<std::vector<std::string>> corpus;
  for (const std::string& line : read_lines(path)) {
    if (is_comment_or_blank(line)) continue;
    corpus.push_back(tokenize(line));
  }
  if (corpus.empty()) throw Error("corpus file has no content: " + path);
  return corpus;
}

void save_model(const TrainedModel& model, const SoftConfig& soft,
                const std::string& vectors_path, const std::string& artifact_path,
                const std::string& config_hash) {
  json doc;
  doc["format"] = "pkil-model";
  doc["version"] = kToolVersion;
  doc["config_hash"] = config_hash;
  doc["tree"] = json::parse(tree_to_json(model.tree));
  doc["leaf_probabilities"] = model.leaf_probs.values;
  doc["thresholds"] = model.thresholds.values;
  json kernel = {{"kind", kernel_kind_name(model.kernel.kind)}};
  if (model.kernel.kind == KernelKind::polynomial) {
    kernel["degree"] = model.kernel.degree;
    kernel["coef0"] = model.kernel.coef0;
  }
  if (model.kernel.kind == KernelKind::gaussian) kernel["sigma"] = model.kernel.sigma;
  doc["kernel"] = std::move(kernel);
  doc["soft"] = {{"tau", soft.tau}, {"epsilon", soft.epsilon}};
  doc["embedding"] = {{"max_tokens", model.max_tokens},
                      {"fragment_window", model.fragment_window},
                      {"vectors_path", vectors_path},
                      {"vectors_checksum", to_hex(fnv1a_file(vectors_path))}};

  std::ofstream out(artifact_path);
  if (!out) throw Error("cannot write model artifact: " + artifact_path);
  out << doc.dump(2) << '\n';
}

LoadedModel load_model(const std::string& artifact_path) {
  std::ifstream in(artifact_path);
  if (!in) throw Error("cannot open model artifact: " + artifact_path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error("model artifact is not valid JSON: " + std::string(e.what()));
  }
  if (doc.value("format", std::string{}) != "pkil-model") {
    throw Error("not a pkil model artifact: " + artifact_path);
  }

  LoadedModel loaded;
  TrainedModel& model = loaded.model;
  model.tree = parse_tree(doc.at("tree").dump());
  model.leaf_probs.values = doc.at("leaf_probabilities").get<std::map<std::string, double>>();
  model.thresholds.values = doc.at("thresholds").get<std::map<std::string, double>>();

  const json& kernel = doc.at("kernel");
  model.kernel.kind = kernel_kind_from_name(kernel.at("kind").get<std::string>());
  model.kernel.degree = kernel.value("degree", 1);
  model.kernel.coef0 = kernel.value("coef0", 0.0);
  model.kernel.sigma = kernel.value("sigma", 1.0);
  validate(model.kernel);

  loaded.soft.tau = doc.at("soft").at("tau").get<double>();
  loaded.soft.epsilon = doc.at("soft").at("epsilon").get<double>();
  validate(loaded.soft);

  const json& embedding = doc.at("embedding");
  model.max_tokens = embedding.at("max_tokens").get<int>();
  model.fragment_window = embedding.at("fragment_window").get<int>();

  std::string vectors_path = embedding.at("vectors_path").get<std::string>();
  if (!std::filesystem::exists(vectors_path)) {
    const auto beside_artifact =
        std::filesystem::path(artifact_path).parent_path() / vectors_path;
    if (std::filesystem::exists(beside_artifact)) vectors_path = beside_artifact.string();
  }
  const std::string expected = embedding.at("vectors_checksum").get<std::string>();
  const std::string actual = to_hex(fnv1a_file(vectors_path));
  if (actual != expected) {
    throw Error("vector file checksum mismatch for " + vectors_path + ": expected " + expected +
                ", got " + actual);
  }
  model.vectors = std::make_shared<WordVectors>(load_vectors_file(vectors_path));
  model.finalize();
  return loaded;
}

}  // namespace pkil
