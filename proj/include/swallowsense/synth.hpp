#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace swallowsense {

// Acoustic profile of one class of synthetic swallows. Abnormal swallows are
// weaker and lower-pitched than normal ones, so the default profiles keep
// the two classes separable by construction.
struct ClassProfile {
    double amp_lo = 0.0, amp_hi = 0.0;    // burst peak amplitude range
    double freq_lo = 0.0, freq_hi = 0.0;  // dominant-frequency band, Hz
    double dur_lo = 0.0, dur_hi = 0.0;    // burst duration range, seconds
};

struct SynthConfig {
    int n_patients = 20;
    int swallows_lo = 10, swallows_hi = 15;  // per patient, inclusive
    int sample_rate = 16000;
    double abnormal_fraction = 0.5;
    // Duration range centers on the 0.64 s mean event length of real cohorts.
    ClassProfile normal{0.60, 0.90, 800.0, 1600.0, 0.44, 0.84};
    ClassProfile abnormal{0.15, 0.35, 300.0, 700.0, 0.44, 0.84};
    double noise_floor_db = -40.0;  // relative to the normal-class peak
    std::uint64_t seed = 7;

    bool valid() const;
};

struct CohortPaths {
    std::string manifest_path;
    std::vector<std::string> wav_paths;
    std::vector<std::string> annotation_paths;
};

// Writes a full synthetic cohort under out_dir: manifest.csv, wav/*.wav and
// annotations/*.json in exactly the formats the rest of the toolkit
// consumes. Bursts are Hann-enveloped band-limited noise separated by
// >= 1.5 s of silence over a low background noise floor; annotations record
// the exact burst extents. Byte-identical output for identical (cfg, seed).
CohortPaths generate_cohort(const SynthConfig& cfg, const std::string& out_dir);

}  // namespace swallowsense
