#pragma once

#include <stdexcept>
#include <string>

namespace swallowsense {

// Stable category for every recoverable input/data error the toolkit reports.
enum class errc {
    // audio_io
    malformed_container,
    unsupported_encoding,
    empty_audio,
    // dsp
    empty_signal,
    invalid_window,
    non_positive_reference,
    // segmentation
    segment_out_of_range,
    length_mismatch,
    empty_grid,
    // features
    too_few_bins,
    empty_spectrogram,
    empty_segment,
    too_few_samples,
    segment_out_of_bounds,
    missing_key,
    non_numeric_cell,
    header_mismatch,
    // dataset
    missing_column,
    inconsistent_patient,
    invalid_pas,
    class_too_small,
    invalid_value,
    // model
    degenerate_labels,
    dimension_mismatch,
    empty_prediction_list,
    single_class,
    no_positives,
    empty_class,
    // configuration / filesystem
    invalid_config,
    io_failure,
};

inline const char* errc_name(errc code) {
    switch (code) {
        case errc::malformed_container: return "malformed_container";
        case errc::unsupported_encoding: return "unsupported_encoding";
        case errc::empty_audio: return "empty_audio";
        case errc::empty_signal: return "empty_signal";
        case errc::invalid_window: return "invalid_window";
        case errc::non_positive_reference: return "non_positive_reference";
        case errc::segment_out_of_range: return "segment_out_of_range";
        case errc::length_mismatch: return "length_mismatch";
        case errc::empty_grid: return "empty_grid";
        case errc::too_few_bins: return "too_few_bins";
        case errc::empty_spectrogram: return "empty_spectrogram";
        case errc::empty_segment: return "empty_segment";
        case errc::too_few_samples: return "too_few_samples";
        case errc::segment_out_of_bounds: return "segment_out_of_bounds";
        case errc::missing_key: return "missing_key";
        case errc::non_numeric_cell: return "non_numeric_cell";
        case errc::header_mismatch: return "header_mismatch";
        case errc::missing_column: return "missing_column";
        case errc::inconsistent_patient: return "inconsistent_patient";
        case errc::invalid_pas: return "invalid_pas";
        case errc::class_too_small: return "class_too_small";
        case errc::invalid_value: return "invalid_value";
        case errc::degenerate_labels: return "degenerate_labels";
        case errc::dimension_mismatch: return "dimension_mismatch";
        case errc::empty_prediction_list: return "empty_prediction_list";
        case errc::single_class: return "single_class";
        case errc::no_positives: return "no_positives";
        case errc::empty_class: return "empty_class";
        case errc::invalid_config: return "invalid_config";
        case errc::io_failure: return "io_failure";
    }
    return "unknown";
}

// Recoverable error: bad input data or configuration. Carries the code so
// callers (and the CLI exit path) can branch on category.
class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

// Internal invariant violation (e.g. patient leakage between train and test).
// Deliberately not an Error: the CLI maps it to a distinct exit code.
class AssertionError : public std::logic_error {
public:
    explicit AssertionError(const std::string& message)
        : std::logic_error("internal assertion failed: " + message) {}
};

}  // namespace swallowsense
