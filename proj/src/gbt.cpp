#include "polymodel/gbt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "polymodel/errors.hpp"

namespace polymodel {

namespace {

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

double clamp_logodds(double p) {
    if (p <= 0.0) return -10.0;
    if (p >= 1.0) return 10.0;
    return std::clamp(std::log(p / (1.0 - p)), -10.0, 10.0);
}

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

// Greedy variance-reduction split over the node's examples: maximize
// sum_children (sum g)^2 / n against the parent's (sum g)^2 / n.
SplitChoice best_split(const std::vector<TrainingExample>& data, const std::vector<double>& grad,
                       const std::vector<int>& idx) {
    SplitChoice best;
    const std::size_t n = idx.size();
    if (n < 2) return best;
    double total = 0.0;
    for (int i : idx) total += grad[static_cast<std::size_t>(i)];
    const double parent_score = total * total / static_cast<double>(n);

    std::vector<int> order(idx);
    for (int f = 0; f < 5; ++f) {
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double xa = data[static_cast<std::size_t>(a)].features[static_cast<std::size_t>(f)];
            const double xb = data[static_cast<std::size_t>(b)].features[static_cast<std::size_t>(f)];
            if (xa != xb) return xa < xb;
            return a < b;
        });
        double left_sum = 0.0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            left_sum += grad[static_cast<std::size_t>(order[k])];
            const double xk = data[static_cast<std::size_t>(order[k])].features[static_cast<std::size_t>(f)];
            const double xn = data[static_cast<std::size_t>(order[k + 1])].features[static_cast<std::size_t>(f)];
            if (xk == xn) continue;
            const double right_sum = total - left_sum;
            const double score = left_sum * left_sum / static_cast<double>(k + 1) +
                                 right_sum * right_sum / static_cast<double>(n - k - 1);
            const double gain = score - parent_score;
            if (gain > best.gain + 1e-12) {
                best.found = true;
                best.feature = f;
                best.threshold = 0.5 * (xk + xn);
                best.gain = gain;
            }
        }
    }
    return best;
}

int grow_node(RegressionTree& tree, const std::vector<TrainingExample>& data,
              const std::vector<double>& grad, const std::vector<int>& idx, int depth_left) {
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    SplitChoice split;
    if (depth_left > 0) split = best_split(data, grad, idx);
    if (!split.found) {
        double mean = 0.0;
        for (int i : idx) mean += grad[static_cast<std::size_t>(i)];
        mean /= static_cast<double>(idx.size());
        tree.nodes[static_cast<std::size_t>(node_id)].value = mean;
        return node_id;
    }

    std::vector<int> left, right;
    for (int i : idx) {
        const double x =
            data[static_cast<std::size_t>(i)].features[static_cast<std::size_t>(split.feature)];
        (x < split.threshold ? left : right).push_back(i);
    }
    const int l = grow_node(tree, data, grad, left, depth_left - 1);
    const int r = grow_node(tree, data, grad, right, depth_left - 1);
    TreeNode& node = tree.nodes[static_cast<std::size_t>(node_id)];
    node.leaf = false;
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return node_id;
}

double mean_logloss(const std::vector<TrainingExample>& data, const std::vector<double>& margin) {
    double loss = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        // numerically stable -[y ln p + (1-y) ln(1-p)] for p = sigmoid(margin)
        const double m = margin[i];
        const double y = data[i].label;
        loss += std::max(m, 0.0) - y * m + std::log1p(std::exp(-std::abs(m)));
    }
    return loss / static_cast<double>(data.size());
}

} // namespace

BoostedModel train_boosted(const std::vector<TrainingExample>& data, int rounds, int depth,
                           double rate, std::uint64_t seed) {
    (void)seed; // exact greedy splits, no subsampling yet
    if (data.empty()) throw InsufficientDataError("empty training set");
    if (rounds < 1 || depth < 1) throw ConfigError("rounds and depth must be >= 1");
    if (!(rate > 0.0) || rate > 1.0) throw ConfigError("learning rate must be in (0, 1]");

    BoostedModel model;
    model.learning_rate = rate;
    model.n_rounds = rounds;
    model.max_depth = depth;

    double label_mean = 0.0;
    for (const auto& ex : data) label_mean += ex.label;
    label_mean /= static_cast<double>(data.size());
    model.base_score = clamp_logodds(label_mean);

    std::vector<double> margin(data.size(), model.base_score);
    std::vector<double> grad(data.size());
    std::vector<int> all(data.size());
    std::iota(all.begin(), all.end(), 0);

    model.round_loss.reserve(static_cast<std::size_t>(rounds));
    for (int round = 0; round < rounds; ++round) {
        for (std::size_t i = 0; i < data.size(); ++i)
            grad[i] = static_cast<double>(data[i].label) - sigmoid(margin[i]);
        RegressionTree tree;
        grow_node(tree, data, grad, all, depth);
        for (std::size_t i = 0; i < data.size(); ++i)
            margin[i] += rate * tree.eval(data[i].features);
        model.trees.push_back(std::move(tree));
        model.round_loss.push_back(mean_logloss(data, margin));
    }
    return model;
}

double predict_proba(const BoostedModel& model, const std::array<double, 5>& features) {
    double margin = model.base_score;
    for (const auto& tree : model.trees) margin += model.learning_rate * tree.eval(features);
    return sigmoid(margin);
}

std::string model_to_json(const BoostedModel& model) {
    nlohmann::ordered_json j;
    j["base_score"] = model.base_score;
    j["rate"] = model.learning_rate;
    j["n_rounds"] = model.n_rounds;
    j["max_depth"] = model.max_depth;
    nlohmann::ordered_json trees = nlohmann::ordered_json::array();
    for (const auto& tree : model.trees) {
        nlohmann::ordered_json splits = nlohmann::ordered_json::array();
        nlohmann::ordered_json leaves = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
            const TreeNode& n = tree.nodes[i];
            if (n.leaf) {
                leaves.push_back({{"node", i}, {"value", n.value}});
            } else {
                splits.push_back({{"node", i},
                                  {"feature", n.feature},
                                  {"threshold", n.threshold},
                                  {"left", n.left},
                                  {"right", n.right}});
            }
        }
        trees.push_back({{"splits", splits}, {"leaves", leaves}});
    }
    j["trees"] = trees;
    return j.dump();
}

BoostedModel model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
        BoostedModel model;
        model.base_score = j.at("base_score").get<double>();
        model.learning_rate = j.at("rate").get<double>();
        model.n_rounds = j.at("n_rounds").get<int>();
        model.max_depth = j.at("max_depth").get<int>();
        for (const auto& jt : j.at("trees")) {
            std::size_t n_nodes = jt.at("splits").size() + jt.at("leaves").size();
            RegressionTree tree;
            tree.nodes.resize(n_nodes);
            for (const auto& js : jt.at("splits")) {
                TreeNode& n = tree.nodes[js.at("node").get<std::size_t>()];
                n.leaf = false;
                n.feature = js.at("feature").get<int>();
                n.threshold = js.at("threshold").get<double>();
                n.left = js.at("left").get<int>();
                n.right = js.at("right").get<int>();
            }
            for (const auto& jl : jt.at("leaves")) {
                TreeNode& n = tree.nodes[jl.at("node").get<std::size_t>()];
                n.leaf = true;
                n.value = jl.at("value").get<double>();
            }
            model.trees.push_back(std::move(tree));
        }
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed model JSON: ") + e.what());
    }
}

} // namespace polymodel
