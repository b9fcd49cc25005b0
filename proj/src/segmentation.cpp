#include "swallowsense/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "swallowsense/dsp.hpp"
#include "swallowsense/errors.hpp"

namespace swallowsense {

namespace {

constexpr int kEnvelopeFrame = 2048;
constexpr int kEnvelopeHop = 512;

double peak_abs_in_window(const AudioClip& clip, double start_s, double end_s) {
    const auto n = static_cast<std::ptrdiff_t>(clip.samples.size());
    auto lo = std::clamp<std::ptrdiff_t>(std::llround(start_s * clip.sample_rate), 0, n);
    auto hi = std::clamp<std::ptrdiff_t>(std::llround(end_s * clip.sample_rate), 0, n);
    double peak = 0.0;
    for (auto i = lo; i < hi; ++i) peak = std::max(peak, std::abs(clip.samples[i]));
    return peak;
}

}  // namespace

std::vector<Segment> merge_close_segments(std::vector<Segment> segments, double gap_time) {
    if (segments.empty()) return segments;
    std::sort(segments.begin(), segments.end(),
              [](const Segment& a, const Segment& b) { return a.start_s < b.start_s; });
    std::vector<Segment> merged;
    merged.push_back(segments.front());
    for (std::size_t i = 1; i < segments.size(); ++i) {
        if (segments[i].start_s - merged.back().end_s < gap_time)
            merged.back().end_s = std::max(merged.back().end_s, segments[i].end_s);
        else
            merged.push_back(segments[i]);
    }
    return merged;
}

std::vector<Segment> detect_segments(const AudioClip& clip, const SegmentationParams& params) {
    if (!params.valid()) throw Error(errc::invalid_config, "bad segmentation params");

    const RmsEnvelope env = frame_rms(clip, kEnvelopeFrame, kEnvelopeHop);
    const double ref = *std::max_element(env.values.begin(), env.values.end());
    if (ref <= 0.0) return {};  // all-silent clip

    const std::vector<double> db = amplitude_to_db(env.values, ref);
    const double hop_s = static_cast<double>(kEnvelopeHop) / clip.sample_rate;
    const double duration = clip.duration_s();

    // Contiguous runs of non-silent frames become candidates; frame i owns
    // the hop cell [i*hop, (i+1)*hop).
    std::vector<Segment> candidates;
    std::size_t run_start = 0;
    bool in_run = false;
    for (std::size_t i = 0; i <= db.size(); ++i) {
        const bool loud = i < db.size() && db[i] > -params.top_db;
        if (loud && !in_run) {
            run_start = i;
            in_run = true;
        } else if (!loud && in_run) {
            candidates.push_back({static_cast<double>(run_start) * hop_s,
                                  std::min(static_cast<double>(i) * hop_s, duration)});
            in_run = false;
        }
    }

    candidates = merge_close_segments(std::move(candidates), params.gap_time);

    std::vector<Segment> kept;
    for (const Segment& seg : candidates) {
        const double peak = peak_abs_in_window(clip, seg.start_s, seg.end_s);
        if (peak < params.min_amplitude || peak > params.max_amplitude) continue;
        kept.push_back(seg);
    }
    return kept;
}

std::vector<Segment> sliding_windows(const AudioClip& clip, double window_s, double overlap) {
    if (!(window_s > 0.0) || !(overlap >= 0.0 && overlap < 1.0))
        throw Error(errc::invalid_config, "window_s must be > 0 and overlap in [0, 1)");
    const double duration = clip.duration_s();
    if (duration <= window_s) return {{0.0, duration}};

    const double stride = window_s * (1.0 - overlap);
    std::vector<Segment> windows;
    for (std::size_t k = 0;; ++k) {
        const double start = static_cast<double>(k) * stride;
        if (start + window_s > duration + 1e-9) break;
        windows.push_back({start, start + window_s});
    }
    if (windows.empty() || windows.back().end_s < duration - 1e-9)
        windows.push_back({duration - window_s, duration});  // right-aligned remainder
    return windows;
}

Mask segments_to_mask(const std::vector<Segment>& segments, double duration_s,
                      int resolution_hz) {
    if (resolution_hz < 1) throw Error(errc::invalid_config, "resolution_hz must be >= 1");
    for (const Segment& seg : segments) {
        if (seg.start_s < -1e-9 || seg.end_s > duration_s + 1e-9 || seg.start_s >= seg.end_s)
            throw Error(errc::segment_out_of_range,
                        "segment [" + std::to_string(seg.start_s) + ", " +
                            std::to_string(seg.end_s) + ") outside [0, " +
                            std::to_string(duration_s) + "]");
    }
    const auto n_cells = static_cast<std::size_t>(std::ceil(duration_s * resolution_hz));
    Mask mask(n_cells, 0);
    for (const Segment& seg : segments) {
        for (std::size_t i = 0; i < n_cells; ++i) {
            const double center = (static_cast<double>(i) + 0.5) / resolution_hz;
            if (center >= seg.start_s && center < seg.end_s) mask[i] = 1;
        }
    }
    return mask;
}

SegmentationScore score_segmentation(const Mask& predicted, const Mask& truth) {
    if (predicted.size() != truth.size() || predicted.empty())
        throw Error(errc::length_mismatch, "masks must have equal non-zero length");
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] != 0, t = truth[i] != 0;
        tp += p && t;
        fp += p && !t;
        fn += !p && t;
        tn += !p && !t;
    }
    auto ratio = [](std::size_t num, std::size_t den) {
        return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    SegmentationScore score;
    score.iou = ratio(tp, tp + fp + fn);
    score.sensitivity = ratio(tp, tp + fn);
    score.specificity = ratio(tn, tn + fp);
    return score;
}

GridSearchResult grid_search_params(const std::vector<std::pair<AudioClip, Mask>>& clips,
                                    const ParamGrid& grid, int resolution_hz) {
    if (clips.empty()) throw Error(errc::empty_grid, "no clips to evaluate");
    if (grid.top_db.empty() || grid.gap_time.empty() || grid.min_amplitude.empty() ||
        grid.max_amplitude.empty())
        throw Error(errc::empty_grid, "every parameter needs at least one candidate");

    GridSearchResult result;
    bool have_best = false;

    // Total order over grid points: mean IoU first, then the declared tie
    // rules. Reduction by maximum under this order is evaluation-order
    // independent.
    auto better = [&](const GridPoint& a, std::size_t ia, const GridPoint& b, std::size_t ib) {
        if (a.mean_iou != b.mean_iou) return a.mean_iou > b.mean_iou;
        if (a.params.top_db != b.params.top_db) return a.params.top_db > b.params.top_db;
        if (a.params.gap_time != b.params.gap_time) return a.params.gap_time < b.params.gap_time;
        return ia < ib;
    };

    std::size_t best_index = 0;
    for (double top_db : grid.top_db)
        for (double gap_time : grid.gap_time)
            for (double min_amp : grid.min_amplitude)
                for (double max_amp : grid.max_amplitude) {
                    SegmentationParams params{top_db, gap_time, min_amp, max_amp};
                    double iou_sum = 0.0;
                    for (const auto& [clip, truth] : clips) {
                        const auto segs = detect_segments(clip, params);
                        const Mask pred =
                            segments_to_mask(segs, clip.duration_s(), resolution_hz);
                        Mask truth_sized = truth;
                        truth_sized.resize(pred.size(), 0);
                        iou_sum += score_segmentation(pred, truth_sized).iou;
                    }
                    GridPoint point{params, iou_sum / static_cast<double>(clips.size())};
                    const std::size_t index = result.table.size();
                    result.table.push_back(point);
                    if (!have_best || better(point, index, result.table[best_index], best_index)) {
                        best_index = index;
                        have_best = true;
                    }
                }

    result.best = result.table[best_index].params;
    result.best_iou = result.table[best_index].mean_iou;
    return result;
}

std::vector<Segment> parse_annotation(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(errc::invalid_value, std::string("annotation JSON: ") + e.what());
    }
    if (!doc.contains("segments") || !doc["segments"].is_array())
        throw Error(errc::invalid_value, "annotation JSON needs a segments array");
    std::vector<Segment> segments;
    for (const auto& item : doc["segments"]) {
        Segment seg{item.at("start_s").get<double>(), item.at("end_s").get<double>()};
        if (!(seg.start_s >= 0.0 && seg.start_s < seg.end_s))
            throw Error(errc::invalid_value, "annotation segment must satisfy 0 <= start < end");
        segments.push_back(seg);
    }
    std::sort(segments.begin(), segments.end(),
              [](const Segment& a, const Segment& b) { return a.start_s < b.start_s; });
    return segments;
}

std::vector<Segment> load_annotation_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(errc::io_failure, "cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_annotation(text);
}

std::string annotation_to_json(const std::string& source_id,
                               const std::vector<Segment>& segments) {
    nlohmann::json doc;
    doc["source_id"] = source_id;
    doc["segments"] = nlohmann::json::array();
    for (const Segment& seg : segments)
        doc["segments"].push_back({{"start_s", seg.start_s}, {"end_s", seg.end_s}});
    return doc.dump(2);
}

}  // namespace swallowsense
