#pragma once

#include <array>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "swallowsense/audio_io.hpp"
#include "swallowsense/dsp.hpp"
#include "swallowsense/segmentation.hpp"

namespace swallowsense {

inline constexpr int kGenderFemale = 0;
inline constexpr int kGenderMale = 1;

// Domain-informed description of one swallow event. The model consumes
// feature_vector(); duration_s is kept as metadata and is not a model column.
struct SwallowFeatures {
    std::array<double, 5> top_freqs{};  // Hz, descending salience
    double mean_freq = 0.0;             // Hz
    double median_freq = 0.0;           // Hz
    double peak_amp = 0.0;
    double avg_amp = 0.0;
    double auc = 0.0;                   // seconds * amplitude
    double duration_s = 0.0;
    double age = 0.0;                   // years
    int gender = kGenderFemale;         // {female:0, male:1}
};

struct Demographics {
    double age = 0.0;
    int gender = kGenderFemale;
};

// Center frequencies of the k highest-salience bins, salience being the mean
// magnitude across frames. Ordered by descending salience; ties prefer the
// lower frequency.
std::vector<double> top_k_frequencies(const Spectrogram& spec, std::size_t k = 5);

// Per-frame spectral centroid (0 for all-zero frames); returns the mean and
// median of the centroid track (midpoint convention for even counts).
std::pair<double, double> mean_median_frequency(const Spectrogram& spec);

// (max |s|, mean |s|).
std::pair<double, double> amplitude_stats(std::span<const double> samples);

// Composite trapezoid over |s[n]| with spacing 1/sample_rate:
// dx * (|s0|/2 + sum_{1..N-2} |sn| + |s_{N-1}|/2).
double area_under_curve(std::span<const double> samples, int sample_rate);

// Slices the waveform at sample-snapped segment bounds and fills every
// field. Amplitude features are computed on the raw slice. Spectral features
// are computed on the slice scaled to unit peak and requantized to the
// 16-bit grid, which makes them independent of recording gain (exactly, not
// just approximately). A silent slice short-circuits to all-zero acoustics.
SwallowFeatures extract_features(const AudioClip& clip, const Segment& segment,
                                 const Demographics& demographics);

// Model columns, in order: freq_1..freq_5, mean_freq, median_freq, peak_amp,
// avg_amp, auc, age, gender.
std::vector<double> feature_vector(const SwallowFeatures& f);
const std::vector<std::string>& feature_names();

// External per-swallow feature table (e.g. pretrained-embedding exports),
// realigned to the given (source_id, segment_index) order.
struct ExternalFeatures {
    std::vector<std::string> columns;          // numeric column names
    std::vector<std::vector<double>> rows;     // aligned to requested keys
};

ExternalFeatures import_external_features(
    const std::string& csv_text,
    const std::vector<std::pair<std::string, int>>& swallow_keys);
ExternalFeatures import_external_features_file(
    const std::string& path,
    const std::vector<std::pair<std::string, int>>& swallow_keys);

}  // namespace swallowsense
