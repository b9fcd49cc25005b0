#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace swallowsense {

// Mono waveform normalized to [-1, 1]; the unit every downstream stage
// consumes. Immutable by convention after construction.
struct AudioClip {
    std::vector<double> samples;
    int sample_rate = 0;  // Hz, > 0
    std::string source_id;

    double duration_s() const {
        return static_cast<double>(samples.size()) / static_cast<double>(sample_rate);
    }
};

// Parses a RIFF/WAVE container. Supported: format code 1 (PCM, 8/16/24/32
// bit) and 3 (IEEE float, 32 bit), any channel count. Multi-channel data is
// downmixed by per-frame arithmetic mean; integer PCM is scaled by the type's
// maximum magnitude (16-bit divides by 32768). Non-audio chunks (LIST, cue,
// ...) are skipped. Throws Error with code malformed_container,
// unsupported_encoding or empty_audio; never crashes on hostile input.
AudioClip load_wav(std::string_view bytes, const std::string& source_id);
AudioClip load_wav_file(const std::string& path);

// Serializes to 16-bit PCM mono. load_wav(write_wav(c)) reproduces every
// sample within 1/32768.
std::vector<std::uint8_t> write_wav(const AudioClip& clip);
void write_wav_file(const AudioClip& clip, const std::string& path);

}  // namespace swallowsense
