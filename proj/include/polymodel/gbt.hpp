#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace polymodel {

/// One supervised example: (lts, mrar, sharpe, ret, aum) after imputation,
/// label = next-month return positive.
struct TrainingExample {
    std::array<double, 5> features{};
    int label = 0;
};

struct TreeNode {
    bool leaf = true;
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0; // leaf log-odds increment (unscaled)
};

struct RegressionTree {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    double eval(const std::array<double, 5>& x) const {
        int i = 0;
        while (!nodes[static_cast<std::size_t>(i)].leaf) {
            const TreeNode& n = nodes[static_cast<std::size_t>(i)];
            i = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
        }
        return nodes[static_cast<std::size_t>(i)].value;
    }
};

/// Gradient-boosted classifier on logistic loss. Trees fit the negative
/// gradient with greedy variance-reduction splits; leaves hold mean
/// residuals, applied at learning_rate.
struct BoostedModel {
    std::vector<RegressionTree> trees;
    double learning_rate = 0.1;
    double base_score = 0.0; // prior log-odds, clamped to +-10
    int n_rounds = 0;
    int max_depth = 0;
    std::vector<double> round_loss; // mean logistic loss after each round
};

/// Trains rounds trees of the given depth. Deterministic: exact greedy
/// splits, no subsampling (the seed is reserved for future samplers).
BoostedModel train_boosted(const std::vector<TrainingExample>& data, int rounds, int depth,
                           double rate, std::uint64_t seed);

/// sigmoid(base_score + rate * sum of tree outputs), in (0, 1).
double predict_proba(const BoostedModel& model, const std::array<double, 5>& features);

std::string model_to_json(const BoostedModel& model);
BoostedModel model_from_json(const std::string& text);

} // namespace polymodel
