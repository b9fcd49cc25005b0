#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swallowsense/dataset.hpp"
#include "swallowsense/features.hpp"
#include "swallowsense/model.hpp"
#include "swallowsense/segmentation.hpp"
#include "swallowsense/synth.hpp"

namespace swallowsense {

enum class SegMode { human, fixed, sliding };

SegMode seg_mode_from_string(const std::string& s);
LabelScheme scheme_from_string(const std::string& s);
Aggregation aggregation_from_string(const std::string& s);

struct SegmentOptions {
    std::string manifest_path;
    std::string out_dir;
    SegMode mode = SegMode::fixed;
    SegmentationParams params{};  // defaults are the fixed-parameter optimum
    double window_s = 1.0;
    double overlap = 0.5;
    int resolution_hz = 100;
};

struct GridSearchOptions {
    std::string manifest_path;
    std::string out_dir;
    ParamGrid grid;
    int resolution_hz = 100;
};

struct ExtractOptions {
    std::string manifest_path;
    std::string out_path;  // features CSV
    SegMode mode = SegMode::fixed;
    SegmentationParams params{};
    double window_s = 1.0;
    double overlap = 0.5;
};

struct EvaluateOptions {
    std::string manifest_path;
    std::string out_dir;
    SegMode mode = SegMode::human;
    LabelScheme scheme = LabelScheme::abnormality;
    Aggregation primary_aggregation = Aggregation::mean;
    int n_splits = 5;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
    SegmentationParams params{};
    ForestConfig forest{};
    double window_s = 1.0;
    double overlap = 0.5;
    int n_threads = 1;
    std::optional<std::string> external_features_path;  // replaces acoustic columns
};

struct SynthOptions {
    SynthConfig cfg{};
    std::string out_dir;
};

// Cohort flattened to per-swallow rows; the form every evaluation consumes.
struct CohortData {
    std::vector<PatientRecord> records;
    std::vector<std::string> feature_columns;
    FeatureMatrix X;                       // one row per swallow
    Labels y;                              // per-swallow label (patient's PAS mapped)
    std::vector<int> patient_index;        // row -> index into records
    std::vector<int> swallow_counts;       // per patient, aligned with records
    std::vector<std::pair<std::string, int>> swallow_keys;  // (source_id, segment_index)
};

CohortData prepare_cohort(const std::vector<PatientRecord>& records, SegMode mode,
                          const SegmentationParams& params, LabelScheme scheme,
                          double window_s = 1.0, double overlap = 0.5,
                          const std::optional<std::string>& external_features_path = {});

struct SplitMetrics {
    EvalMetrics mean_agg;
    EvalMetrics max_agg;
    EvalMetrics mode_agg;
    std::optional<EvalMetrics> swallow_level;
};

struct EvalResult {
    std::vector<SplitMetrics> per_split;
    SplitPlan plan;
};

// Runs every split of the plan: train on the train patients' swallows,
// predict the test swallows, aggregate per patient under all three
// strategies, and score patient-level metrics (plus swallow-level metrics
// when requested). Asserts the plan is leakage-free before touching data.
EvalResult evaluate_cohort(const CohortData& cohort, const SplitPlan& plan,
                           const ForestConfig& forest, bool swallow_level_metrics,
                           int n_threads = 1);

// Command entry points. Each validates options, writes its artifacts under
// the output location and returns the machine-readable report as a JSON
// string (pretty-printed, deterministic for identical inputs).
std::string cmd_segment(const SegmentOptions& opt);
std::string cmd_gridsearch(const GridSearchOptions& opt);
std::string cmd_extract(const ExtractOptions& opt);
std::string cmd_evaluate(const EvaluateOptions& opt);
std::string cmd_synth(const SynthOptions& opt);

// Human-readable table for a command's JSON report.
std::string render_report_text(const std::string& report_json);

}  // namespace swallowsense
