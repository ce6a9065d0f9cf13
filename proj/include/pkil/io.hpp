#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pkil/model.hpp"
#include "pkil/synthetic.hpp"
#include "pkil/tree.hpp"

namespace pkil {

inline constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a 64-bit, used for artifact/vector-file integrity and config hashes.
std::uint64_t fnv1a(std::span<const char> bytes);
std::uint64_t fnv1a_file(const std::string& path);
std::string to_hex(std::uint64_t value);

/// Posts file: one JSON object {"id", "text"} per line.
std::vector<AnnotatedExample> load_posts(const std::string& path);
/// Annotations file: one JSON object {"example_id", "annotator_id",
/// "steps": [{"q", "a"}], "label"} per line.
void load_annotations(const std::string& path, std::vector<AnnotatedExample>& dataset);
/// Both at once, with annotator paths canonicalized against the tree.
std::vector<AnnotatedExample> load_dataset(const std::string& posts_path,
                                           const std::string& annotations_path,
                                           const ProcessTree& tree);

void save_posts(std::span<const AnnotatedExample> dataset, const std::string& path,
                const std::string& header_comment);
void save_annotations(std::span<const AnnotatedExample> dataset, const std::string& path,
                      const std::string& header_comment);

/// Corpus file: plain text, one post per line.
void save_lines(std::span<const std::string> lines, const std::string& path,
                const std::string& header_comment);
std::vector<std::vector<std::string>> load_corpus(const std::string& path);

/// Model artifact: a single JSON document bundling the tree, leaf
/// probabilities, thresholds, kernel spec, soft config, embedding settings
/// and a (path, checksum) reference to the word-vector file.
void save_model(const TrainedModel& model, const SoftConfig& soft,
                const std::string& vectors_path, const std::string& artifact_path,
                const std::string& config_hash);

struct LoadedModel {
  TrainedModel model;
  SoftConfig soft;
};

/// Loads an artifact and its referenced vector file (tried as stored, then
/// relative to the artifact). Throws on checksum mismatch.
LoadedModel load_model(const std::string& artifact_path);

}  // namespace pkil
