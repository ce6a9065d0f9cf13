#include <doctest.h>

#include <cmath>

#include "pkil/baseline.hpp"
#include "pkil/error.hpp"

using namespace pkil;

namespace {

WordVectors polar_vectors() {
  // "up" words have positive means, "down" words negative.
  WordVectors wv;
  wv.dim = 2;
  wv.table["sun"] = Eigen::Vector2d(3.0, 4.0);
  wv.table["warm"] = Eigen::Vector2d(2.0, 2.0);
  wv.table["bright"] = Eigen::Vector2d(1.0, 3.0);
  wv.table["rain"] = Eigen::Vector2d(-3.0, -4.0);
  wv.table["cold"] = Eigen::Vector2d(-2.0, -2.0);
  wv.table["dark"] = Eigen::Vector2d(-1.0, -3.0);
  wv.max_token_length = 6;
  return wv;
}

std::vector<std::pair<std::string, std::string>> separable_dataset() {
  return {
      {"sun warm bright.", "up"},   {"warm sun sun.", "up"},
      {"bright warm.", "up"},       {"sun bright warm sun.", "up"},
      {"rain cold dark.", "down"},  {"cold rain rain.", "down"},
      {"dark cold.", "down"},       {"rain dark cold rain.", "down"},
  };
}

}  // namespace

TEST_CASE("featurize_post: position means, padding, truncation") {
  const WordVectors wv = polar_vectors();
  const Eigen::VectorXd f = featurize_post("sun cold", wv, 4);
  REQUIRE(f.size() == 4);
  CHECK(f[0] == 3.5);   // mean of (3, 4)
  CHECK(f[1] == -2.0);  // mean of (-2, -2)
  CHECK(f[2] == 0.0);
  CHECK(f[3] == 0.0);

  CHECK(featurize_post("", wv, 3).isZero(0.0));

  const Eigen::VectorXd truncated = featurize_post("sun warm bright rain", wv, 2);
  REQUIRE(truncated.size() == 2);
  CHECK(truncated[0] == 3.5);
  CHECK(truncated[1] == 2.0);
}

TEST_CASE("train_baseline: linearly separable fixture reaches full accuracy") {
  const WordVectors wv = polar_vectors();
  const auto dataset = separable_dataset();
  BaselineConfig config;
  config.max_positions = 6;
  const SharedWeightLogReg model = train_baseline(dataset, wv, config);

  int hits = 0;
  for (const auto& [post, label] : dataset) {
    if (predict_baseline(post, model, wv).label == label) ++hits;
  }
  CHECK(hits == static_cast<int>(dataset.size()));
}

TEST_CASE("train_baseline: zero epochs give uniform predictions") {
  const WordVectors wv = polar_vectors();
  BaselineConfig config;
  config.max_positions = 6;
  config.epochs = 0;
  const SharedWeightLogReg model = train_baseline(separable_dataset(), wv, config);
  const BaselinePrediction pred = predict_baseline("sun warm.", model, wv);
  CHECK(pred.probabilities.at("up") == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pred.probabilities.at("down") == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("train_baseline: loss is non-increasing over epochs") {
  const WordVectors wv = polar_vectors();
  const auto dataset = separable_dataset();
  double previous = std::numeric_limits<double>::infinity();
  for (int epochs : {1, 5, 20, 80, 200}) {
    BaselineConfig config;
    config.max_positions = 6;
    config.learning_rate = 0.05;
    config.epochs = epochs;
    const double final_loss = train_baseline(dataset, wv, config).final_loss;
    CHECK(final_loss <= previous + 1e-12);
    previous = final_loss;
  }
}

TEST_CASE("train_baseline: single-label dataset rejected") {
  const WordVectors wv = polar_vectors();
  const std::vector<std::pair<std::string, std::string>> dataset = {
      {"sun warm.", "up"}, {"bright sun.", "up"}};
  CHECK_THROWS_AS((void)train_baseline(dataset, wv, {}), Error);
}

TEST_CASE("predict_baseline: probabilities sum to one") {
  const WordVectors wv = polar_vectors();
  BaselineConfig config;
  config.max_positions = 6;
  const SharedWeightLogReg model = train_baseline(separable_dataset(), wv, config);
  for (const std::string post : {"sun.", "rain dark.", "unknownword", ""}) {
    const BaselinePrediction pred = predict_baseline(post, model, wv);
    double sum = 0.0;
    for (const auto& [label, p] : pred.probabilities) sum += p;
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
}

TEST_CASE("highlight: runs of contributing tokens merge into spans") {
  const WordVectors wv = polar_vectors();
  BaselineConfig config;
  config.max_positions = 6;
  const SharedWeightLogReg model = train_baseline(separable_dataset(), wv, config);

  const std::string post = "sun warm rain bright.";
  const auto spans = highlight(post, model, wv, 0.0);

  // spans are disjoint, ordered, in bounds
  std::size_t previous_end = 0;
  for (const auto& [begin, end] : spans) {
    CHECK(begin >= previous_end);
    CHECK(begin < end);
    CHECK(end <= post.size());
    previous_end = end;
  }

  // "sun warm" contribute positively for label "up" and sit adjacent, so
  // they merge into one span; "rain" interrupts it.
  REQUIRE(!spans.empty());
  CHECK(post.substr(spans[0].first, spans[0].second - spans[0].first) == "sun warm");

  // a threshold above every contribution leaves nothing highlighted
  CHECK(highlight(post, model, wv, 1e6).empty());
}
