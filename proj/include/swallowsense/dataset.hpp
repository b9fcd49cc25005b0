#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "swallowsense/segmentation.hpp"

namespace swallowsense {

struct RecordingRef {
    std::string wav_path;
    std::optional<std::string> annotation_path;
    std::optional<SegmentationParams> params_override;  // per-clip manual tuning
};

// One patient: demographics, PAS rating, and the recordings they own. The
// patient is the unit of data partitioning.
struct PatientRecord {
    std::string patient_id;
    double age = 0.0;
    int gender = 0;  // {female:0, male:1}
    int pas = 1;     // 1..8
    std::vector<RecordingRef> recordings;
};

enum class LabelScheme { abnormality, severity };

// abnormality: PAS 1-2 -> 0, 3-8 -> 1.
// severity:    PAS 1-2 -> 0, 3-5 -> 1, 6-8 -> 2.
int label_for(LabelScheme scheme, int pas);
int num_classes(LabelScheme scheme);

struct SplitPlan {
    struct Split {
        std::vector<std::string> train_ids;
        std::vector<std::string> test_ids;
    };
    int n_splits = 5;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
    std::vector<Split> splits;
};

// Manifest CSV: header patient_id,age,gender,pas,wav_path with optional
// annotation_path,top_db,gap_time,min_amplitude,max_amplitude columns. Rows
// group by patient_id; demographics must agree across a patient's rows.
// Relative paths resolve against base_dir (the manifest's directory for the
// file variant).
std::vector<PatientRecord> parse_manifest(const std::string& csv_text,
                                          const std::string& base_dir = "");
std::vector<PatientRecord> load_manifest(const std::string& path);

// n_splits independent stratified draws. Within each class, patients are
// allocated to test by seeded shuffle (round(test_fraction * n) of them, at
// least 1, never all); among 50 candidate shuffles the first whose test
// swallow share lies within 10% (relative) of test_fraction wins, else the
// closest. Deterministic given (records, swallow_counts, seed).
SplitPlan make_splits(const std::vector<PatientRecord>& records, LabelScheme scheme,
                      const std::vector<int>& swallow_counts, int n_splits = 5,
                      double test_fraction = 0.2, std::uint64_t seed = 0);

// Total segments across one patient's recordings; appended to each of the
// patient's feature vectors as the swallow_count model column.
int total_swallows(const std::vector<std::vector<Segment>>& segments_per_recording);

// Throws AssertionError unless every split partitions the patients exactly
// (no train/test overlap, nobody missing). Called on every evaluation path.
void assert_no_leakage(const SplitPlan& plan, const std::vector<std::string>& patient_ids);

}  // namespace swallowsense
