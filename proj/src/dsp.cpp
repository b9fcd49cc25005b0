#include "swallowsense/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "swallowsense/errors.hpp"

namespace swallowsense {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey; in-place, decimation in time.
void fft_pow2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {  // bit-reversal permutation
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double angle = -kTwoPi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(angle), std::sin(angle));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Direct evaluation of the transform sum; O(N^2) but exact for any length.
std::vector<std::complex<double>> dft_direct(const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            const double angle = -kTwoPi * static_cast<double>(k) * static_cast<double>(m) /
                                 static_cast<double>(n);
            re += x[m] * std::cos(angle);
            im += x[m] * std::sin(angle);
        }
        out[k] = {re, im};
    }
    return out;
}

// Mirror index without repeating the edge sample: [a b c] -> ... c b [a b c] b a ...
std::size_t reflect_index(std::ptrdiff_t i, std::size_t len) {
    if (len == 1) return 0;
    const std::ptrdiff_t period = 2 * (static_cast<std::ptrdiff_t>(len) - 1);
    std::ptrdiff_t j = i % period;
    if (j < 0) j += period;
    if (j >= static_cast<std::ptrdiff_t>(len)) j = period - j;
    return static_cast<std::size_t>(j);
}

std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n));
    return w;
}

}  // namespace

std::vector<std::complex<double>> dft(const std::vector<double>& signal) {
    if (signal.empty()) throw Error(errc::empty_signal, "dft of empty signal");
    if (is_power_of_two(signal.size())) {
        std::vector<std::complex<double>> a(signal.begin(), signal.end());
        fft_pow2(a);
        return a;
    }
    return dft_direct(signal);
}

Spectrogram stft(const AudioClip& clip, int n_fft, int hop) {
    if (n_fft < 2 || hop < 1 || hop > n_fft)
        throw Error(errc::invalid_window,
                    "n_fft=" + std::to_string(n_fft) + " hop=" + std::to_string(hop));
    if (clip.samples.empty()) throw Error(errc::empty_signal, "stft of empty clip");

    const std::size_t len = clip.samples.size();
    const std::size_t n = static_cast<std::size_t>(n_fft);
    const std::size_t n_bins = n / 2 + 1;
    const std::size_t n_frames = 1 + len / static_cast<std::size_t>(hop);
    const std::vector<double> window = hann_window(n);
    const bool pow2 = is_power_of_two(n);

    Spectrogram spec;
    spec.n_fft = n_fft;
    spec.hop = hop;
    spec.magnitudes.assign(n_bins, std::vector<double>(n_frames, 0.0));
    spec.bin_freqs.resize(n_bins);
    for (std::size_t k = 0; k < n_bins; ++k)
        spec.bin_freqs[k] = static_cast<double>(k) * clip.sample_rate / static_cast<double>(n_fft);
    spec.frame_times.resize(n_frames);

    std::vector<double> frame(n);
    std::vector<std::complex<double>> a(n);
    for (std::size_t t = 0; t < n_frames; ++t) {
        const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(t) * hop;
        spec.frame_times[t] = static_cast<double>(center) / clip.sample_rate;
        const std::ptrdiff_t start = center - static_cast<std::ptrdiff_t>(n) / 2;
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t src = reflect_index(start + static_cast<std::ptrdiff_t>(i), len);
            frame[i] = clip.samples[src] * window[i];
        }
        std::vector<std::complex<double>> spectrum;
        if (pow2) {
            for (std::size_t i = 0; i < n; ++i) a[i] = frame[i];
            fft_pow2(a);
            spectrum = a;
        } else {
            spectrum = dft_direct(frame);
        }
        for (std::size_t k = 0; k < n_bins; ++k) {
            const double re = spectrum[k].real(), im = spectrum[k].imag();
            // sqrt instead of std::hypot: correctly rounded by IEEE, so
            // magnitudes commute exactly with power-of-two input scaling.
            spec.magnitudes[k][t] = std::sqrt(re * re + im * im);
        }
    }
    return spec;
}

std::vector<double> amplitude_to_db(const std::vector<double>& magnitudes, double reference) {
    if (!(reference > 0.0))
        throw Error(errc::non_positive_reference, "reference must be positive");
    std::vector<double> out(magnitudes.size());
    for (std::size_t i = 0; i < magnitudes.size(); ++i)
        out[i] = 20.0 * std::log10(std::max(magnitudes[i], 1e-10) / reference);
    return out;
}

RmsEnvelope frame_rms(const AudioClip& clip, int frame_len, int hop) {
    if (frame_len < 1 || hop < 1)
        throw Error(errc::invalid_window,
                    "frame_len=" + std::to_string(frame_len) + " hop=" + std::to_string(hop));
    if (clip.samples.empty()) throw Error(errc::empty_signal, "frame_rms of empty clip");

    const std::size_t len = clip.samples.size();
    const std::size_t n_frames = 1 + len / static_cast<std::size_t>(hop);
    RmsEnvelope env;
    env.times.resize(n_frames);
    env.values.resize(n_frames);
    for (std::size_t t = 0; t < n_frames; ++t) {
        const std::ptrdiff_t center = static_cast<std::ptrdiff_t>(t) * hop;
        const std::ptrdiff_t start = center - frame_len / 2;
        double acc = 0.0;
        for (int i = 0; i < frame_len; ++i) {
            const double s = clip.samples[reflect_index(start + i, len)];
            acc += s * s;
        }
        env.times[t] = static_cast<double>(center) / clip.sample_rate;
        env.values[t] = std::sqrt(acc / frame_len);
    }
    return env;
}

}  // namespace swallowsense
