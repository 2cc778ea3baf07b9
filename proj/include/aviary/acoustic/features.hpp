#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aviary/ingest/audio.hpp"

namespace aviary::acoustic {

struct AcousticConfig {
    int window_len = 2048;        // STFT window, power of two >= 256
    int hop_len = 512;
    double rolloff_fraction = 0.85;
    double frame_s = 0.020;       // zcr / rms / ste framing
    double frame_hop_s = 0.010;
    double gate_strength = 1.5;   // 0 disables gating
    double noise_percentile = 20.0;
    double target_rms = 0.1;
    bool normalize_rms = true;

    // Throws ValidationError naming the offending field.
    void validate() const;
};

// Row-major frames x bins magnitudes of a Hann-windowed (periodic) real DFT.
struct Spectrogram {
    std::vector<double> magnitudes;
    std::size_t frames = 0;
    std::size_t bins = 0;
    std::vector<double> bin_freqs;    // k * sample_rate / window_len
    std::vector<double> frame_times;  // frame start, seconds
    int window_len = 0;
    int hop_len = 0;
    int sample_rate = 0;

    std::span<const double> frame(std::size_t i) const {
        return {magnitudes.data() + i * bins, bins};
    }
};

struct SpectralFrames {
    std::vector<double> centroid_hz;
    std::vector<double> bandwidth_hz;
    std::vector<double> rolloff_hz;
    std::size_t skipped_frames = 0;  // zero total magnitude
};

struct TemporalFrames {
    std::vector<double> zcr;
    std::vector<double> rms;
    std::vector<double> ste;
};

struct AcousticFeatureVector {
    std::string clip_id;
    int room = 0;
    int week = 0;
    int day = 0;
    double spectral_centroid_hz = 0.0;
    double spectral_bandwidth_hz = 0.0;
    double spectral_rolloff_hz = 0.0;
    double zero_crossing_rate = 0.0;
    double rms_amplitude = 0.0;
    double short_term_energy = 0.0;
    std::size_t skipped_frames = 0;
};

struct PreprocessResult {
    ingest::AudioSignal signal;       // mono
    double clipped_fraction = 0.0;
    bool gated = false;               // false when the clip is shorter than one window
};

// Channel mean; the identity for mono input.
std::vector<double> downmix(const ingest::AudioSignal& signal);

// Mono downmix, stationary spectral gating, then scaling to target RMS (skipped
// when normalize_rms is false) with clipping to [-1, 1]. Throws ValidationError("zero-energy signal").
PreprocessResult preprocess(const ingest::AudioSignal& signal, double target_rms,
                            const AcousticConfig& config = {});

// Frame count = 1 + floor((N - window_len) / hop_len).
Spectrogram stft(std::span<const double> samples, int sample_rate, int window_len, int hop_len);

SpectralFrames spectral_features(const Spectrogram& spec, double rolloff_fraction);

// zcr = sign changes / (frame_len - 1), zeros positive; rms = sqrt(mean x^2);
// ste = sum x^2.
TemporalFrames temporal_features(std::span<const double> samples, std::size_t frame_len,
                                 std::size_t hop_len);

// Clip means of the six per-frame features; no preprocessing is applied here.
AcousticFeatureVector summarize_clip(const ingest::AudioSignal& signal, const AcousticConfig& config);

}  // namespace aviary::acoustic
