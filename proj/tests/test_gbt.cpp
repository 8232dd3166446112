#include <doctest.h>

#include <cmath>

#include "polymodel/errors.hpp"
#include "polymodel/gbt.hpp"
#include "test_support.hpp"

using namespace polymodel;

namespace {

std::vector<TrainingExample> random_examples(std::size_t n, std::uint64_t seed,
                                             double signal = 1.0) {
    testsup::Rng rng(seed);
    std::vector<TrainingExample> data(n);
    for (auto& ex : data) {
        for (auto& f : ex.features) f = rng.normal();
        const double logit = signal * (ex.features[0] + 0.5 * ex.features[2]) + rng.normal();
        ex.label = logit > 0.0 ? 1 : 0;
    }
    return data;
}

// independent recursive traversal used as the dual-route oracle
double traverse(const RegressionTree& tree, int node, const std::array<double, 5>& x) {
    const TreeNode& n = tree.nodes[static_cast<std::size_t>(node)];
    if (n.leaf) return n.value;
    return x[static_cast<std::size_t>(n.feature)] < n.threshold ? traverse(tree, n.left, x)
                                                                : traverse(tree, n.right, x);
}

} // namespace

TEST_CASE("uniform labels collapse to the clamped prior") {
    std::vector<TrainingExample> data(20);
    for (auto& ex : data) {
        ex.features = {1, 2, 3, 4, 5};
        ex.label = 1;
    }
    BoostedModel model = train_boosted(data, 10, 3, 0.1, 0);
    CHECK(model.base_score == 10.0);
    for (double probe : {-100.0, 0.0, 55.0}) {
        std::array<double, 5> x{probe, probe, probe, probe, probe};
        CHECK(predict_proba(model, x) >= 0.999);
        CHECK(predict_proba(model, x) < 1.0);
    }
}

TEST_CASE("separable single-feature data trains to perfect accuracy") {
    testsup::Rng rng(21);
    std::vector<TrainingExample> data(200);
    for (auto& ex : data) {
        ex.features = {rng.normal(), 0, 0, 0, 0};
        ex.label = ex.features[0] > 0.0 ? 1 : 0;
    }
    BoostedModel model = train_boosted(data, 50, 2, 0.1, 0);
    int correct = 0;
    for (const auto& ex : data)
        correct += (predict_proba(model, ex.features) > 0.5 ? 1 : 0) == ex.label;
    CHECK(correct == 200);
}

TEST_CASE("training loss is non-increasing every round") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        auto data = random_examples(300, seed);
        BoostedModel model = train_boosted(data, 60, 3, 0.3, 0);
        REQUIRE(model.round_loss.size() == 60);
        for (std::size_t i = 1; i < model.round_loss.size(); ++i)
            CHECK(model.round_loss[i] <= model.round_loss[i - 1] + 1e-12);
    }
}

TEST_CASE("probabilities stay inside (0, 1) and match the dual traversal") {
    auto data = random_examples(400, 5);
    BoostedModel model = train_boosted(data, 40, 3, 0.1, 0);
    testsup::Rng rng(6);
    for (int i = 0; i < 100; ++i) {
        std::array<double, 5> x{};
        for (auto& v : x) v = 10.0 * rng.normal();
        const double p = predict_proba(model, x);
        CHECK(p > 0.0);
        CHECK(p < 1.0);
        double margin = model.base_score;
        for (const auto& tree : model.trees)
            margin += model.learning_rate * traverse(tree, 0, x);
        CHECK(p == doctest::Approx(1.0 / (1.0 + std::exp(-margin))).epsilon(1e-12));
    }
}

TEST_CASE("zero-tree model predicts the prior") {
    BoostedModel model;
    model.base_score = 0.4;
    model.learning_rate = 0.1;
    CHECK(predict_proba(model, {1, 2, 3, 4, 5}) ==
          doctest::Approx(1.0 / (1.0 + std::exp(-0.4))).epsilon(1e-15));
}

TEST_CASE("mean prediction tracks the label mean on balanced data") {
    auto data = random_examples(600, 9, 0.8);
    double label_mean = 0.0;
    for (const auto& ex : data) label_mean += ex.label;
    label_mean /= static_cast<double>(data.size());
    BoostedModel model = train_boosted(data, 100, 3, 0.1, 0);
    double mean_p = 0.0;
    for (const auto& ex : data) mean_p += predict_proba(model, ex.features);
    mean_p /= static_cast<double>(data.size());
    CHECK(std::abs(mean_p - label_mean) < 0.1);
}

TEST_CASE("training is deterministic") {
    auto data = random_examples(250, 31);
    BoostedModel a = train_boosted(data, 30, 3, 0.1, 7);
    BoostedModel b = train_boosted(data, 30, 3, 0.1, 7);
    testsup::Rng rng(8);
    for (int i = 0; i < 50; ++i) {
        std::array<double, 5> x{};
        for (auto& v : x) v = rng.normal();
        CHECK(predict_proba(a, x) == predict_proba(b, x));
    }
}

TEST_CASE("model JSON round-trips predictions exactly") {
    auto data = random_examples(150, 13);
    BoostedModel model = train_boosted(data, 25, 3, 0.1, 0);
    BoostedModel loaded = model_from_json(model_to_json(model));
    testsup::Rng rng(14);
    for (int i = 0; i < 50; ++i) {
        std::array<double, 5> x{};
        for (auto& v : x) v = 3.0 * rng.normal();
        CHECK(predict_proba(model, x) == predict_proba(loaded, x));
    }
    CHECK_THROWS_AS(model_from_json("{\"rate\": 0.1}"), ParseError);
}

TEST_CASE("training parameter validation") {
    auto data = random_examples(50, 1);
    CHECK_THROWS_AS(train_boosted({}, 10, 3, 0.1, 0), InsufficientDataError);
    CHECK_THROWS_AS(train_boosted(data, 0, 3, 0.1, 0), ConfigError);
    CHECK_THROWS_AS(train_boosted(data, 10, 0, 0.1, 0), ConfigError);
    CHECK_THROWS_AS(train_boosted(data, 10, 3, 0.0, 0), ConfigError);
    CHECK_THROWS_AS(train_boosted(data, 10, 3, 1.5, 0), ConfigError);
}
