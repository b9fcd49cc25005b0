#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swallowsense/audio_io.hpp"

namespace swallowsense {

// The four fixed segmentation thresholds: dB-below-peak silence level, merge
// gap, and the peak-amplitude floor/ceiling gates.
struct SegmentationParams {
    double top_db = 20.0;
    double gap_time = 0.6;        // seconds
    double min_amplitude = 0.0;   // peak |sample| floor
    double max_amplitude = 2.0;   // peak |sample| ceiling

    bool valid() const {
        return top_db > 0.0 && gap_time >= 0.0 && min_amplitude >= 0.0 &&
               min_amplitude < max_amplitude;
    }
};

struct Segment {
    double start_s = 0.0;
    double end_s = 0.0;

    double duration() const { return end_s - start_s; }
};

struct SegmentationScore {
    double iou = 0.0;
    double sensitivity = 0.0;
    double specificity = 0.0;
};

using Mask = std::vector<std::uint8_t>;

// Silence-threshold event detection. Pipeline: RMS envelope (frame 2048, hop
// 512) in dB relative to the clip's peak RMS; frames above -top_db become
// candidate runs with boundaries on hop edges; runs closer than gap_time are
// merged; candidates whose peak |sample| falls outside
// [min_amplitude, max_amplitude] are discarded. Output is sorted and
// non-overlapping; empty output means no events.
std::vector<Segment> detect_segments(const AudioClip& clip, const SegmentationParams& params);

// Merges adjacent segments whose gap is < gap_time. Idempotent.
std::vector<Segment> merge_close_segments(std::vector<Segment> segments, double gap_time);

// Fixed windows at stride window_s*(1-overlap) from t=0; a final
// right-aligned window covers any partial remainder so the union is exactly
// [0, duration]. Clips shorter than the window yield one [0, duration]
// segment.
std::vector<Segment> sliding_windows(const AudioClip& clip, double window_s = 1.0,
                                     double overlap = 0.5);

// Boolean time grid with ceil(duration_s * resolution_hz) cells; cell i is
// set iff its center lies inside any segment (half-open [start, end)).
Mask segments_to_mask(const std::vector<Segment>& segments, double duration_s,
                      int resolution_hz);

// Cell-wise IoU / sensitivity / specificity. Ratios with zero denominator
// (including IoU of two empty masks) report 1.0.
SegmentationScore score_segmentation(const Mask& predicted, const Mask& truth);

// Candidate values per parameter, evaluated as a full Cartesian product.
struct ParamGrid {
    std::vector<double> top_db;
    std::vector<double> gap_time;
    std::vector<double> min_amplitude;
    std::vector<double> max_amplitude;
};

struct GridPoint {
    SegmentationParams params;
    double mean_iou = 0.0;
};

struct GridSearchResult {
    SegmentationParams best;
    double best_iou = 0.0;
    std::vector<GridPoint> table;  // one row per grid point, iteration order
};

// Exhaustive search maximizing mean IoU across clips. Ties break toward
// higher top_db, then lower gap_time, then earlier grid position, so the
// result does not depend on evaluation order.
GridSearchResult grid_search_params(const std::vector<std::pair<AudioClip, Mask>>& clips,
                                    const ParamGrid& grid, int resolution_hz = 100);

// Ground-truth annotation JSON:
// {"source_id": str, "segments": [{"start_s": f, "end_s": f}, ...]}
std::vector<Segment> parse_annotation(const std::string& json_text);
std::vector<Segment> load_annotation_file(const std::string& path);
std::string annotation_to_json(const std::string& source_id,
                               const std::vector<Segment>& segments);

}  // namespace swallowsense
