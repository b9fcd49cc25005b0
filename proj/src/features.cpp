#include "swallowsense/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "swallowsense/errors.hpp"

namespace swallowsense {

std::vector<double> top_k_frequencies(const Spectrogram& spec, std::size_t k) {
    if (spec.n_bins() < k)
        throw Error(errc::too_few_bins, std::to_string(spec.n_bins()) + " bins, need " +
                                            std::to_string(k));
    const std::size_t frames = spec.n_frames();
    std::vector<std::pair<double, std::size_t>> salience(spec.n_bins());
    for (std::size_t b = 0; b < spec.n_bins(); ++b) {
        double sum = 0.0;
        for (std::size_t t = 0; t < frames; ++t) sum += spec.magnitudes[b][t];
        salience[b] = {frames ? sum / static_cast<double>(frames) : 0.0, b};
    }
    // Descending salience; equal salience prefers the lower frequency.
    std::sort(salience.begin(), salience.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    std::vector<double> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = spec.bin_freqs[salience[i].second];
    return out;
}

std::pair<double, double> mean_median_frequency(const Spectrogram& spec) {
    if (spec.n_bins() == 0 || spec.n_frames() == 0)
        throw Error(errc::empty_spectrogram, "no frames");
    const std::size_t frames = spec.n_frames();
    std::vector<double> centroids(frames);
    for (std::size_t t = 0; t < frames; ++t) {
        double num = 0.0, den = 0.0;
        for (std::size_t b = 0; b < spec.n_bins(); ++b) {
            num += spec.bin_freqs[b] * spec.magnitudes[b][t];
            den += spec.magnitudes[b][t];
        }
        centroids[t] = den > 0.0 ? num / den : 0.0;
    }
    const double mean =
        std::accumulate(centroids.begin(), centroids.end(), 0.0) / static_cast<double>(frames);
    std::vector<double> sorted = centroids;
    std::sort(sorted.begin(), sorted.end());
    const double median = frames % 2 == 1
                              ? sorted[frames / 2]
                              : 0.5 * (sorted[frames / 2 - 1] + sorted[frames / 2]);
    return {mean, median};
}

std::pair<double, double> amplitude_stats(std::span<const double> samples) {
    if (samples.empty()) throw Error(errc::empty_segment, "amplitude_stats of empty segment");
    double peak = 0.0, sum = 0.0;
    for (double s : samples) {
        const double a = std::abs(s);
        peak = std::max(peak, a);
        sum += a;
    }
    return {peak, sum / static_cast<double>(samples.size())};
}

double area_under_curve(std::span<const double> samples, int sample_rate) {
    if (samples.size() < 2) throw Error(errc::too_few_samples, "trapezoid needs >= 2 samples");
    const double dx = 1.0 / sample_rate;
    double interior = 0.0;
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) interior += std::abs(samples[i]);
    return dx * (0.5 * std::abs(samples.front()) + interior + 0.5 * std::abs(samples.back()));
}

SwallowFeatures extract_features(const AudioClip& clip, const Segment& segment,
                                 const Demographics& demographics) {
    const auto n = static_cast<std::ptrdiff_t>(clip.samples.size());
    const auto lo = static_cast<std::ptrdiff_t>(std::llround(segment.start_s * clip.sample_rate));
    const auto hi = static_cast<std::ptrdiff_t>(std::llround(segment.end_s * clip.sample_rate));
    if (lo < 0 || hi > n || hi - lo < 2)
        throw Error(errc::segment_out_of_bounds,
                    "segment [" + std::to_string(segment.start_s) + ", " +
                        std::to_string(segment.end_s) + ") vs clip of " +
                        std::to_string(clip.duration_s()) + " s");

    std::span<const double> slice(clip.samples.data() + lo, static_cast<std::size_t>(hi - lo));

    SwallowFeatures f;
    f.duration_s = static_cast<double>(hi - lo) / clip.sample_rate;
    f.age = demographics.age;
    f.gender = demographics.gender;
    std::tie(f.peak_amp, f.avg_amp) = amplitude_stats(slice);
    f.auc = area_under_curve(slice, clip.sample_rate);

    if (f.peak_amp == 0.0) return f;  // silent segment: acoustic fields stay 0

    // Spectral shape should not depend on recording gain: analyze the slice
    // scaled to unit peak and snapped to the 16-bit grid of the source
    // format. The snap makes the gain invariance exact rather than
    // approximate, at a quantization noise floor of 2^-16.
    AudioClip spectral;
    spectral.sample_rate = clip.sample_rate;
    spectral.samples.resize(slice.size());
    for (std::size_t i = 0; i < slice.size(); ++i)
        spectral.samples[i] =
            static_cast<double>(std::llround(slice[i] / f.peak_amp * 32768.0)) / 32768.0;

    const Spectrogram spec = stft(spectral);
    const auto top = top_k_frequencies(spec, f.top_freqs.size());
    std::copy(top.begin(), top.end(), f.top_freqs.begin());
    std::tie(f.mean_freq, f.median_freq) = mean_median_frequency(spec);
    return f;
}

std::vector<double> feature_vector(const SwallowFeatures& f) {
    return {f.top_freqs[0], f.top_freqs[1], f.top_freqs[2], f.top_freqs[3], f.top_freqs[4],
            f.mean_freq,    f.median_freq,  f.peak_amp,     f.avg_amp,      f.auc,
            f.age,          static_cast<double>(f.gender)};
}

const std::vector<std::string>& feature_names() {
    static const std::vector<std::string> names = {
        "freq_1", "freq_2",      "freq_3",   "freq_4",  "freq_5", "mean_freq",
        "median_freq", "peak_amp", "avg_amp", "auc",    "age",    "gender"};
    return names;
}

namespace {

// Minimal CSV: comma-separated, double quotes escape fields, CR tolerated.
std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

double parse_numeric_cell(const std::string& cell, errc code) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || !std::isfinite(value))
        throw Error(code, "cell '" + cell + "' is not a finite number");
    return value;
}

}  // namespace

ExternalFeatures import_external_features(
    const std::string& csv_text,
    const std::vector<std::pair<std::string, int>>& swallow_keys) {
    std::istringstream in(csv_text);
    std::string line;
    if (!std::getline(in, line)) throw Error(errc::header_mismatch, "empty CSV");

    const auto header = split_csv_line(line);
    auto find_col = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw Error(errc::header_mismatch, "missing key column " + name);
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t id_col = find_col("source_id");
    const std::size_t seg_col = find_col("segment_index");

    ExternalFeatures result;
    for (std::size_t c = 0; c < header.size(); ++c)
        if (c != id_col && c != seg_col) result.columns.push_back(header[c]);

    std::map<std::pair<std::string, int>, std::vector<double>> by_key;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw Error(errc::header_mismatch, "row has " + std::to_string(fields.size()) +
                                                   " cells, header has " +
                                                   std::to_string(header.size()));
        std::pair<std::string, int> key{
            fields[id_col],
            static_cast<int>(parse_numeric_cell(fields[seg_col], errc::non_numeric_cell))};
        std::vector<double> row;
        row.reserve(result.columns.size());
        for (std::size_t c = 0; c < fields.size(); ++c)
            if (c != id_col && c != seg_col)
                row.push_back(parse_numeric_cell(fields[c], errc::non_numeric_cell));
        if (!by_key.emplace(key, std::move(row)).second)
            throw Error(errc::invalid_value,
                        "duplicate key (" + key.first + ", " + std::to_string(key.second) + ")");
    }

    for (const auto& key : swallow_keys) {
        auto it = by_key.find(key);
        if (it == by_key.end())
            throw Error(errc::missing_key,
                        "(" + key.first + ", " + std::to_string(key.second) + ") not in CSV");
        result.rows.push_back(it->second);
    }
    return result;
}

ExternalFeatures import_external_features_file(
    const std::string& path, const std::vector<std::pair<std::string, int>>& swallow_keys) {
    std::ifstream in(path);
    if (!in) throw Error(errc::io_failure, "cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return import_external_features(text, swallow_keys);
}

}  // namespace swallowsense
