#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "swallowsense/audio_io.hpp"

namespace swallowsense {

// Magnitude spectrogram. magnitudes[k][t] is the magnitude of bin k in frame
// t; n_bins = n_fft/2 + 1 and bin_freqs[k] = k * sample_rate / n_fft.
struct Spectrogram {
    std::vector<std::vector<double>> magnitudes;  // [n_bins][n_frames]
    std::vector<double> bin_freqs;                // Hz
    std::vector<double> frame_times;              // seconds, frame centers
    int n_fft = 0;
    int hop = 0;

    std::size_t n_bins() const { return magnitudes.size(); }
    std::size_t n_frames() const { return magnitudes.empty() ? 0 : magnitudes[0].size(); }
};

// Discrete Fourier transform X[k] = sum_n x[n] exp(-j 2 pi k n / N).
// Power-of-two lengths take the radix-2 FFT path; any other length is
// evaluated directly in O(N^2), which is exact and fast at the signal sizes
// this toolkit sees.
std::vector<std::complex<double>> dft(const std::vector<double>& signal);

// Short-time Fourier transform: Hann-windowed frames centered by reflection
// padding of n_fft/2 at both ends, hop samples apart.
// n_frames = 1 + floor(len / hop).
Spectrogram stft(const AudioClip& clip, int n_fft = 2048, int hop = 512);

// 20*log10(max(m, 1e-10) / reference). The floor keeps silence finite.
std::vector<double> amplitude_to_db(const std::vector<double>& magnitudes, double reference);

struct RmsEnvelope {
    std::vector<double> times;  // seconds, frame centers
    std::vector<double> values;
};

// RMS of centered frames (reflection padding), same framing as stft.
RmsEnvelope frame_rms(const AudioClip& clip, int frame_len, int hop);

}  // namespace swallowsense
