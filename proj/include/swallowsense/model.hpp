#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace swallowsense {

using FeatureMatrix = std::vector<std::vector<double>>;
using Labels = std::vector<int>;

enum class SplitRule { sqrt_rule, all_features, fixed_k };

struct ForestConfig {
    int n_trees = 100;
    int max_depth = 0;  // 0 = unlimited
    int min_samples_leaf = 1;
    SplitRule features_per_split = SplitRule::sqrt_rule;
    int fixed_k = 0;  // only read when features_per_split == fixed_k
    std::uint64_t seed = 0;
};

struct Prediction {
    std::vector<double> class_probs;  // non-negative, sums to 1
    int predicted_class = 0;          // argmax, ties to lowest index
};

// Abnormality score of one prediction: probability mass on every non-normal
// class (equals P(class 1) for the binary scheme).
double risk_score(const Prediction& p);

struct TreeNode {
    int feature = -1;         // -1 marks a leaf
    double threshold = 0.0;   // x[feature] <= threshold goes left
    int left = -1;
    int right = -1;
    std::vector<double> counts;  // leaf class counts
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
};

class Forest {
public:
    Forest() = default;
    Forest(std::vector<Tree> trees, int n_classes, int n_features, ForestConfig config)
        : trees_(std::move(trees)), n_classes_(n_classes), n_features_(n_features),
          config_(config) {}

    const std::vector<Tree>& trees() const { return trees_; }
    int n_classes() const { return n_classes_; }
    int n_features() const { return n_features_; }
    const ForestConfig& config() const { return config_; }

    std::string to_json() const;          // versioned tree arrays
    static Forest from_json(const std::string& text);

private:
    std::vector<Tree> trees_;
    int n_classes_ = 0;
    int n_features_ = 0;
    ForestConfig config_{};
};

// CART trees on seeded bootstrap resamples, Gini split criterion,
// features-per-split candidates drawn per config. Tree t's PRNG stream is
// derived from (seed, t), so training is deterministic regardless of
// n_threads.
Forest train_forest(const FeatureMatrix& X, const Labels& y, const ForestConfig& config,
                    int n_threads = 1);

// Mean over trees of leaf class-frequency vectors.
Prediction predict_proba(const Forest& forest, const std::vector<double>& x);

enum class Aggregation { mean, max, mode };

// Patient-level aggregation of per-swallow predictions. mean/max aggregate
// risk_score; mode is the majority predicted class (vote ties resolve to the
// higher-risk class) with mode_score oriented so that higher = riskier.
struct RiskReport {
    std::string patient_id;
    std::vector<Prediction> per_swallow;
    double mean_risk = 0.0;
    double max_risk = 0.0;
    int mode_risk = 0;        // modal predicted class
    double mode_score = 0.0;  // vote fraction, sign-oriented toward risk
};

RiskReport aggregate_patient(const std::vector<Prediction>& preds,
                             const std::string& patient_id = "");
double aggregated_score(const RiskReport& report, Aggregation strategy);

struct EvalMetrics {
    double auc_roc = 0.0;
    double auc_prc = 0.0;
    double balanced_accuracy = 0.0;
};

// Mann-Whitney AUC: P(score_pos > score_neg) + 0.5 P(tie), rank-computed.
double auc_roc(const std::vector<double>& scores, const std::vector<int>& labels);

// Area under the precision-recall curve in average-precision form:
// sum (R_i - R_{i-1}) * P_i over descending score thresholds.
double auc_prc(const std::vector<double>& scores, const std::vector<int>& labels);

// Mean of per-class recalls over classes present in labels.
double balanced_accuracy(const std::vector<int>& predicted, const std::vector<int>& labels);

// Macro-averaged one-vs-rest AUC-ROC over classes present in labels.
double multiclass_auc(const std::vector<std::vector<double>>& class_probs,
                      const std::vector<int>& labels);
// Same macro one-vs-rest construction for AUC-PRC.
double multiclass_auc_prc(const std::vector<std::vector<double>>& class_probs,
                          const std::vector<int>& labels);

// Metric evaluated on (forest, X, y); higher = better.
using MetricFn = std::function<double(const Forest&, const FeatureMatrix&, const Labels&)>;

struct FeatureImportance {
    int feature = 0;
    double importance = 0.0;  // mean metric drop across repeats
};

// Permutation importance: per feature, the metric drop averaged over
// n_repeats seeded column shuffles. Sorted descending, ties by feature index.
std::vector<FeatureImportance> permutation_importance(const Forest& forest,
                                                      const FeatureMatrix& X, const Labels& y,
                                                      const MetricFn& metric, int n_repeats,
                                                      std::uint64_t seed);

// X with one column rearranged by perm (perm[i] = source row for row i).
// Building block of permutation_importance, exposed for direct checks.
FeatureMatrix with_permuted_column(const FeatureMatrix& X, int column,
                                   const std::vector<std::size_t>& perm);

}  // namespace swallowsense
