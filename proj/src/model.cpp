#include "swallowsense/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>

#include "json.hpp"
#include "swallowsense/errors.hpp"
#include "swallowsense/prng.hpp"

namespace swallowsense {

namespace {

double gini(const std::vector<double>& counts, double total) {
    if (total <= 0.0) return 0.0;
    double sum_sq = 0.0;
    for (double c : counts) sum_sq += (c / total) * (c / total);
    return 1.0 - sum_sq;
}

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const FeatureMatrix& X, const Labels& y, int n_classes,
                const ForestConfig& config, SplitMix64 rng)
        : X_(X), y_(y), n_classes_(n_classes), config_(config), rng_(rng) {}

    Tree build() {
        const std::size_t n = X_.size();
        std::vector<std::size_t> sample(n);
        for (std::size_t i = 0; i < n; ++i)
            sample[i] = static_cast<std::size_t>(rng_.next_below(n));  // bootstrap
        Tree tree;
        grow(tree, sample, 0);
        return tree;
    }

private:
    int grow(Tree& tree, const std::vector<std::size_t>& rows, int depth) {
        const int index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        std::vector<double> counts(static_cast<std::size_t>(n_classes_), 0.0);
        for (std::size_t r : rows) counts[static_cast<std::size_t>(y_[r])] += 1.0;
        const double total = static_cast<double>(rows.size());

        const bool pure = std::count_if(counts.begin(), counts.end(),
                                        [](double c) { return c > 0.0; }) <= 1;
        const bool depth_capped = config_.max_depth > 0 && depth >= config_.max_depth;
        SplitChoice choice;
        if (!pure && !depth_capped &&
            rows.size() >= 2 * static_cast<std::size_t>(config_.min_samples_leaf))
            choice = best_split(rows, counts, total);

        if (choice.feature < 0) {
            tree.nodes[static_cast<std::size_t>(index)].counts = std::move(counts);
            return index;
        }

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows) {
            if (X_[r][static_cast<std::size_t>(choice.feature)] <= choice.threshold)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }

        const int left = grow(tree, left_rows, depth + 1);
        const int right = grow(tree, right_rows, depth + 1);
        TreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
        node.feature = choice.feature;
        node.threshold = choice.threshold;
        node.left = left;
        node.right = right;
        return index;
    }

    SplitChoice best_split(const std::vector<std::size_t>& rows,
                           const std::vector<double>& counts, double total) {
        const int d = static_cast<int>(X_[0].size());
        int mtry = d;
        if (config_.features_per_split == SplitRule::sqrt_rule)
            mtry = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
        else if (config_.features_per_split == SplitRule::fixed_k)
            mtry = std::clamp(config_.fixed_k, 1, d);

        // Partial Fisher-Yates over the feature indices; drawn order is the
        // tie-break order, so identical gains keep the earlier candidate.
        std::vector<int> features(static_cast<std::size_t>(d));
        std::iota(features.begin(), features.end(), 0);
        for (int i = 0; i < mtry; ++i) {
            const auto j = static_cast<std::size_t>(
                rng_.next_below(static_cast<std::uint64_t>(d - i)) + static_cast<std::uint64_t>(i));
            std::swap(features[static_cast<std::size_t>(i)], features[j]);
        }

        const double parent = gini(counts, total);
        SplitChoice best;
        std::vector<std::pair<double, int>> values(rows.size());  // (x, label)
        for (int fi = 0; fi < mtry; ++fi) {
            const auto f = static_cast<std::size_t>(features[static_cast<std::size_t>(fi)]);
            for (std::size_t i = 0; i < rows.size(); ++i)
                values[i] = {X_[rows[i]][f], y_[rows[i]]};
            std::sort(values.begin(), values.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            std::vector<double> left(static_cast<std::size_t>(n_classes_), 0.0);
            std::vector<double> right = counts;
            for (std::size_t i = 0; i + 1 < values.size(); ++i) {
                const auto cls = static_cast<std::size_t>(values[i].second);
                left[cls] += 1.0;
                right[cls] -= 1.0;
                if (values[i].first == values[i + 1].first) continue;  // no cut inside ties
                const auto n_left = static_cast<double>(i + 1);
                const double n_right = total - n_left;
                if (n_left < config_.min_samples_leaf || n_right < config_.min_samples_leaf)
                    continue;
                const double gain = parent - (n_left * gini(left, n_left) +
                                              n_right * gini(right, n_right)) /
                                                 total;
                if (gain > best.gain) {
                    double threshold = 0.5 * (values[i].first + values[i + 1].first);
                    if (threshold >= values[i + 1].first) threshold = values[i].first;
                    best = {static_cast<int>(f), threshold, gain};
                }
            }
        }
        return best;
    }

    const FeatureMatrix& X_;
    const Labels& y_;
    int n_classes_;
    const ForestConfig& config_;
    SplitMix64 rng_;
};

const TreeNode& find_leaf(const Tree& tree, const std::vector<double>& x) {
    const TreeNode* node = &tree.nodes[0];
    while (node->feature >= 0) {
        const std::size_t child = x[static_cast<std::size_t>(node->feature)] <= node->threshold
                                      ? static_cast<std::size_t>(node->left)
                                      : static_cast<std::size_t>(node->right);
        node = &tree.nodes[child];
    }
    return *node;
}

}  // namespace

Forest train_forest(const FeatureMatrix& X, const Labels& y, const ForestConfig& config,
                    int n_threads) {
    if (X.size() != y.size() || X.empty())
        throw Error(errc::dimension_mismatch, "need matching non-empty X and y");
    const std::size_t d = X[0].size();
    for (const auto& row : X)
        if (row.size() != d) throw Error(errc::dimension_mismatch, "ragged feature matrix");
    if (config.n_trees < 1 || config.min_samples_leaf < 1)
        throw Error(errc::invalid_config, "n_trees and min_samples_leaf must be >= 1");

    int n_classes = 0;
    std::set<int> distinct;
    for (int label : y) {
        if (label < 0) throw Error(errc::invalid_value, "negative class label");
        distinct.insert(label);
        n_classes = std::max(n_classes, label + 1);
    }
    if (distinct.size() < 2)
        throw Error(errc::degenerate_labels, "training labels contain a single class");

    std::vector<Tree> trees(static_cast<std::size_t>(config.n_trees));
    // Tree t's stream depends only on (seed, t): any thread layout produces
    // the same forest.
    auto build_range = [&](int begin, int end) {
        for (int t = begin; t < end; ++t) {
            TreeBuilder builder(X, y, n_classes, config,
                                derive_stream(config.seed, static_cast<std::uint64_t>(t)));
            trees[static_cast<std::size_t>(t)] = builder.build();
        }
    };

    n_threads = std::clamp(n_threads, 1, config.n_trees);
    if (n_threads == 1) {
        build_range(0, config.n_trees);
    } else {
        std::vector<std::thread> workers;
        const int chunk = (config.n_trees + n_threads - 1) / n_threads;
        for (int w = 0; w < n_threads; ++w) {
            const int begin = w * chunk;
            const int end = std::min(config.n_trees, begin + chunk);
            if (begin < end) workers.emplace_back(build_range, begin, end);
        }
        for (auto& worker : workers) worker.join();
    }

    return Forest(std::move(trees), n_classes, static_cast<int>(d), config);
}

Prediction predict_proba(const Forest& forest, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != forest.n_features())
        throw Error(errc::dimension_mismatch,
                    std::to_string(x.size()) + " features, model expects " +
                        std::to_string(forest.n_features()));
    const auto k = static_cast<std::size_t>(forest.n_classes());
    std::vector<double> probs(k, 0.0);
    for (const Tree& tree : forest.trees()) {
        const TreeNode& leaf = find_leaf(tree, x);
        const double total = std::accumulate(leaf.counts.begin(), leaf.counts.end(), 0.0);
        for (std::size_t c = 0; c < k; ++c) probs[c] += leaf.counts[c] / total;
    }
    const auto n_trees = static_cast<double>(forest.trees().size());
    for (double& p : probs) p /= n_trees;

    Prediction pred;
    pred.class_probs = std::move(probs);
    pred.predicted_class = static_cast<int>(
        std::max_element(pred.class_probs.begin(), pred.class_probs.end()) -
        pred.class_probs.begin());  // max_element keeps the first of equal values
    return pred;
}

double risk_score(const Prediction& p) {
    return 1.0 - p.class_probs[0];
}

RiskReport aggregate_patient(const std::vector<Prediction>& preds,
                             const std::string& patient_id) {
    if (preds.empty()) throw Error(errc::empty_prediction_list, "no predictions to aggregate");

    RiskReport report;
    report.patient_id = patient_id;
    report.per_swallow = preds;

    double sum = 0.0, peak = 0.0;
    std::vector<int> votes;
    for (const Prediction& p : preds) {
        const double risk = risk_score(p);
        sum += risk;
        peak = std::max(peak, risk);
        if (static_cast<std::size_t>(p.predicted_class) >= votes.size())
            votes.resize(static_cast<std::size_t>(p.predicted_class) + 1, 0);
        votes[static_cast<std::size_t>(p.predicted_class)] += 1;
    }
    report.mean_risk = sum / static_cast<double>(preds.size());
    report.max_risk = peak;

    // Modal predicted class; vote ties resolve to the higher-risk (higher
    // index) class, the clinically conservative choice.
    int modal = 0;
    for (std::size_t c = 0; c < votes.size(); ++c)
        if (votes[c] >= votes[static_cast<std::size_t>(modal)]) modal = static_cast<int>(c);
    report.mode_risk = modal;
    const double vote_fraction = static_cast<double>(votes[static_cast<std::size_t>(modal)]) /
                                 static_cast<double>(preds.size());
    report.mode_score = modal > 0 ? vote_fraction : 1.0 - vote_fraction;
    return report;
}

double aggregated_score(const RiskReport& report, Aggregation strategy) {
    switch (strategy) {
        case Aggregation::mean: return report.mean_risk;
        case Aggregation::max: return report.max_risk;
        case Aggregation::mode: return report.mode_score;
    }
    return 0.0;
}

double auc_roc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw Error(errc::dimension_mismatch, "scores and labels must align");
    std::size_t n_pos = 0;
    for (int label : labels) n_pos += label != 0;
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw Error(errc::single_class, "AUC-ROC needs both classes");

    // Rank form of the Mann-Whitney statistic. Ranks are half-integers, so
    // every intermediate here is exact in doubles and the result matches the
    // pairwise P(pos > neg) + 0.5 P(tie) definition bit for bit.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]] != 0) pos_rank_sum += avg_rank;
        i = j;
    }
    const double n_pos_d = static_cast<double>(n_pos);
    const double u = pos_rank_sum - n_pos_d * (n_pos_d + 1.0) / 2.0;
    return u / (n_pos_d * static_cast<double>(n_neg));
}

double auc_prc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size() || scores.empty())
        throw Error(errc::dimension_mismatch, "scores and labels must align");
    std::size_t n_pos = 0;
    for (int label : labels) n_pos += label != 0;
    if (n_pos == 0) throw Error(errc::no_positives, "AUC-PRC needs a positive example");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    // Average precision: sum (R_i - R_{i-1}) * P_i over descending score
    // thresholds, tied scores entering as one group.
    double ap = 0.0;
    double prev_recall = 0.0;
    std::size_t tp = 0, seen = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        for (std::size_t k = i; k < j; ++k) tp += labels[order[k]] != 0;
        seen += j - i;
        const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(seen);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j;
    }
    return ap;
}

double balanced_accuracy(const std::vector<int>& predicted, const std::vector<int>& labels) {
    if (predicted.size() != labels.size() || labels.empty())
        throw Error(errc::empty_class, "predictions and labels must align and be non-empty");
    std::set<int> classes(labels.begin(), labels.end());
    double recall_sum = 0.0;
    for (int cls : classes) {
        std::size_t hits = 0, members = 0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] != cls) continue;
            ++members;
            hits += predicted[i] == cls;
        }
        recall_sum += static_cast<double>(hits) / static_cast<double>(members);
    }
    return recall_sum / static_cast<double>(classes.size());
}

namespace {

double macro_one_vs_rest(const std::vector<std::vector<double>>& class_probs,
                         const std::vector<int>& labels,
                         double (*binary_metric)(const std::vector<double>&,
                                                 const std::vector<int>&)) {
    if (class_probs.size() != labels.size() || labels.empty())
        throw Error(errc::dimension_mismatch, "probabilities and labels must align");
    std::set<int> classes(labels.begin(), labels.end());
    if (classes.size() < 2) throw Error(errc::single_class, "need >= 2 classes present");

    double sum = 0.0;
    for (int cls : classes) {
        std::vector<double> scores(labels.size());
        std::vector<int> binary(labels.size());
        for (std::size_t i = 0; i < labels.size(); ++i) {
            scores[i] = class_probs[i][static_cast<std::size_t>(cls)];
            binary[i] = labels[i] == cls ? 1 : 0;
        }
        sum += binary_metric(scores, binary);
    }
    return sum / static_cast<double>(classes.size());
}

}  // namespace

double multiclass_auc(const std::vector<std::vector<double>>& class_probs,
                      const std::vector<int>& labels) {
    return macro_one_vs_rest(class_probs, labels, auc_roc);
}

double multiclass_auc_prc(const std::vector<std::vector<double>>& class_probs,
                          const std::vector<int>& labels) {
    return macro_one_vs_rest(class_probs, labels, auc_prc);
}

FeatureMatrix with_permuted_column(const FeatureMatrix& X, int column,
                                   const std::vector<std::size_t>& perm) {
    FeatureMatrix out = X;
    for (std::size_t i = 0; i < X.size(); ++i)
        out[i][static_cast<std::size_t>(column)] = X[perm[i]][static_cast<std::size_t>(column)];
    return out;
}

std::vector<FeatureImportance> permutation_importance(const Forest& forest,
                                                      const FeatureMatrix& X, const Labels& y,
                                                      const MetricFn& metric, int n_repeats,
                                                      std::uint64_t seed) {
    if (n_repeats < 1) throw Error(errc::invalid_config, "n_repeats must be >= 1");
    const double baseline = metric(forest, X, y);
    const int d = forest.n_features();

    std::vector<FeatureImportance> importances;
    for (int f = 0; f < d; ++f) {
        SplitMix64 rng = derive_stream(seed, static_cast<std::uint64_t>(f));
        double drop_sum = 0.0;
        for (int r = 0; r < n_repeats; ++r) {
            std::vector<std::size_t> perm(X.size());
            std::iota(perm.begin(), perm.end(), 0);
            rng.shuffle(perm);
            drop_sum += baseline - metric(forest, with_permuted_column(X, f, perm), y);
        }
        importances.push_back({f, drop_sum / n_repeats});
    }
    std::sort(importances.begin(), importances.end(), [](const auto& a, const auto& b) {
        if (a.importance != b.importance) return a.importance > b.importance;
        return a.feature < b.feature;
    });
    return importances;
}

std::string Forest::to_json() const {
    nlohmann::json doc;
    doc["format_version"] = 1;
    doc["n_classes"] = n_classes_;
    doc["n_features"] = n_features_;
    doc["config"] = {
        {"n_trees", config_.n_trees},
        {"max_depth", config_.max_depth},
        {"min_samples_leaf", config_.min_samples_leaf},
        {"features_per_split", config_.features_per_split == SplitRule::sqrt_rule  ? "sqrt"
                               : config_.features_per_split == SplitRule::all_features ? "all"
                                                                                       : "fixed"},
        {"fixed_k", config_.fixed_k},
        {"seed", config_.seed},
    };
    doc["trees"] = nlohmann::json::array();
    for (const Tree& tree : trees_) {
        nlohmann::json nodes = nlohmann::json::array();
        for (const TreeNode& node : tree.nodes) {
            nlohmann::json entry = {{"feature", node.feature},
                                    {"threshold", node.threshold},
                                    {"left", node.left},
                                    {"right", node.right}};
            if (node.feature < 0) entry["counts"] = node.counts;
            nodes.push_back(std::move(entry));
        }
        doc["trees"].push_back(std::move(nodes));
    }
    return doc.dump();
}

Forest Forest::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(errc::invalid_value, std::string("model JSON: ") + e.what());
    }
    if (doc.value("format_version", 0) != 1)
        throw Error(errc::invalid_value, "unsupported model format version");

    Forest forest;
    forest.n_classes_ = doc.at("n_classes").get<int>();
    forest.n_features_ = doc.at("n_features").get<int>();
    const auto& cfg = doc.at("config");
    forest.config_.n_trees = cfg.at("n_trees").get<int>();
    forest.config_.max_depth = cfg.at("max_depth").get<int>();
    forest.config_.min_samples_leaf = cfg.at("min_samples_leaf").get<int>();
    const std::string rule = cfg.at("features_per_split").get<std::string>();
    forest.config_.features_per_split = rule == "sqrt"  ? SplitRule::sqrt_rule
                                        : rule == "all" ? SplitRule::all_features
                                                        : SplitRule::fixed_k;
    forest.config_.fixed_k = cfg.at("fixed_k").get<int>();
    forest.config_.seed = cfg.at("seed").get<std::uint64_t>();

    for (const auto& nodes : doc.at("trees")) {
        Tree tree;
        for (const auto& entry : nodes) {
            TreeNode node;
            node.feature = entry.at("feature").get<int>();
            node.threshold = entry.at("threshold").get<double>();
            node.left = entry.at("left").get<int>();
            node.right = entry.at("right").get<int>();
            if (node.feature < 0) node.counts = entry.at("counts").get<std::vector<double>>();
            tree.nodes.push_back(std::move(node));
        }
        forest.trees_.push_back(std::move(tree));
    }
    return forest;
}

}  // namespace swallowsense
