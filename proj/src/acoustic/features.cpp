#include "aviary/acoustic/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <fmt/format.h>

#include "aviary/error.hpp"
#include "aviary/simd/kernels.hpp"
#include "fft.hpp"

namespace aviary::acoustic {

namespace {

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

std::vector<double> periodic_hann(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    }
    return w;
}

void check_stft_params(int window_len, int hop_len) {
    if (!is_power_of_two(window_len) || window_len < 256) {
        throw ValidationError("window_len must be a power of two >= 256");
    }
    if (hop_len < 1 || hop_len > window_len) throw ValidationError("hop_len must lie in [1, window_len]");
}

double percentile(std::vector<double>& values, double pct) {
    const double pos = pct / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
    const double a = values[lo];
    if (frac == 0.0 || lo + 1 >= values.size()) return a;
    const double b = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
    return a + frac * (b - a);
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Stationary spectral gate with weighted overlap-add resynthesis.
std::vector<double> spectral_gate(const std::vector<double>& x, const AcousticConfig& cfg) {
    const auto n = x.size();
    const auto win = static_cast<std::size_t>(cfg.window_len);
    const auto hop = static_cast<std::size_t>(cfg.hop_len);
    const std::size_t half = win / 2;
    const std::size_t frames = 1 + (n + hop - 1) / hop;
    const std::size_t padded_len = (frames - 1) * hop + win;

    // Reflect-pad half a window on each side, zeros beyond.
    std::vector<double> padded(padded_len, 0.0);
    for (std::size_t i = 0; i < padded_len; ++i) {
        const auto pos = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(half);
        if (pos < 0) {
            padded[i] = x[static_cast<std::size_t>(-pos)];
        } else if (static_cast<std::size_t>(pos) < n) {
            padded[i] = x[static_cast<std::size_t>(pos)];
        } else if (static_cast<std::size_t>(pos) < n + half) {
            const std::size_t mirrored = 2 * (n - 1) - static_cast<std::size_t>(pos);
            padded[i] = x[mirrored];
        }
    }

    const auto& k = simd::active_kernels();
    const auto window = periodic_hann(win);
    detail::RealFft fft(win);
    const std::size_t bins = fft.bins();

    std::vector<double> mags(frames * bins);
    for (std::size_t f = 0; f < frames; ++f) {
        k.multiply(padded.data() + f * hop, window.data(), fft.time(), win);
        fft.forward();
        k.magnitude(fft.re(), fft.im(), mags.data() + f * bins, bins);
    }

    std::vector<double> noise(bins);
    std::vector<double> column(frames);
    for (std::size_t b = 0; b < bins; ++b) {
        for (std::size_t f = 0; f < frames; ++f) column[f] = mags[f * bins + b];
        noise[b] = percentile(column, cfg.noise_percentile);
    }

    std::vector<double> out(padded_len, 0.0);
    std::vector<double> norm(padded_len, 0.0);
    std::vector<double> gain(bins), smooth(bins);
    const double inv_n = 1.0 / static_cast<double>(win);
    for (std::size_t f = 0; f < frames; ++f) {
        const double* m = mags.data() + f * bins;
        for (std::size_t b = 0; b < bins; ++b) {
            gain[b] = m[b] > 0.0 ? std::max(0.0, 1.0 - noise[b] * cfg.gate_strength / m[b]) : 0.0;
        }
        for (std::size_t b = 0; b < bins; ++b) {
            const std::size_t lo = b == 0 ? 0 : b - 1;
            const std::size_t hi = std::min(bins - 1, b + 1);
            double s = 0.0;
            for (std::size_t j = lo; j <= hi; ++j) s += gain[j];
            smooth[b] = s / static_cast<double>(hi - lo + 1);
        }
        k.multiply(padded.data() + f * hop, window.data(), fft.time(), win);
        fft.forward();
        k.multiply(fft.re(), smooth.data(), fft.re(), bins);
        k.multiply(fft.im(), smooth.data(), fft.im(), bins);
        fft.inverse();
        double* dst = out.data() + f * hop;
        double* nrm = norm.data() + f * hop;
        const double* t = fft.time();
        for (std::size_t i = 0; i < win; ++i) {
            dst[i] += window[i] * t[i] * inv_n;
            nrm[i] += window[i] * window[i];
        }
    }

    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w2 = norm[i + half];
        y[i] = w2 > 1e-10 ? out[i + half] / w2 : 0.0;
    }
    return y;
}

}  // namespace

void AcousticConfig::validate() const {
    check_stft_params(window_len, hop_len);
    if (!(rolloff_fraction > 0.0 && rolloff_fraction <= 1.0)) {
        throw ValidationError("rolloff_fraction must lie in (0, 1]");
    }
    if (!(frame_s > 0.0) || !(frame_hop_s > 0.0)) throw ValidationError("frame_s and frame_hop_s must be > 0");
    if (!(gate_strength >= 0.0) || !std::isfinite(gate_strength)) {
        throw ValidationError("gate_strength must be finite and >= 0");
    }
    if (!(noise_percentile >= 0.0 && noise_percentile <= 100.0)) {
        throw ValidationError("noise_percentile must lie in [0, 100]");
    }
    if (!(target_rms > 0.0 && target_rms <= 1.0)) throw ValidationError("target_rms must lie in (0, 1]");
}

std::vector<double> downmix(const ingest::AudioSignal& signal) {
    if (signal.channels < 1) throw ValidationError("channel count must be >= 1");
    const auto ch = static_cast<std::size_t>(signal.channels);
    if (ch == 1) return signal.samples;
    std::vector<double> mono(signal.frames());
    for (std::size_t i = 0; i < mono.size(); ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < ch; ++c) s += signal.samples[i * ch + c];
        mono[i] = s / static_cast<double>(ch);
    }
    return mono;
}

PreprocessResult preprocess(const ingest::AudioSignal& signal, double target_rms, const AcousticConfig& config) {
    AcousticConfig cfg = config;
    cfg.target_rms = target_rms;
    cfg.validate();
    if (signal.samples.empty() || signal.frames() == 0) throw ValidationError("empty signal");

    PreprocessResult result;
    std::vector<double> mono = downmix(signal);
    const auto& k = simd::active_kernels();
    if (k.sum_squares(mono.data(), mono.size()) == 0.0) throw ValidationError("zero-energy signal");

    if (cfg.gate_strength > 0.0 && mono.size() >= static_cast<std::size_t>(cfg.window_len)) {
        mono = spectral_gate(mono, cfg);
        result.gated = true;
    } else if (mono.size() >= static_cast<std::size_t>(cfg.window_len)) {
        result.gated = true;  // strength 0: the gate is the identity
    }

    const double energy = k.sum_squares(mono.data(), mono.size());
    if (!(energy > 0.0)) throw ValidationError("zero-energy signal after gating");
    const double rms = std::sqrt(energy / static_cast<double>(mono.size()));
    const double scale = cfg.normalize_rms ? target_rms / rms : 1.0;
    std::size_t clipped = 0;
    for (auto& v : mono) {
        v *= scale;
        if (v > 1.0 || v < -1.0) {
            v = std::clamp(v, -1.0, 1.0);
            ++clipped;
        }
    }
    result.clipped_fraction = static_cast<double>(clipped) / static_cast<double>(mono.size());
    result.signal.samples = std::move(mono);
    result.signal.sample_rate = signal.sample_rate;
    result.signal.channels = 1;
    return result;
}

Spectrogram stft(std::span<const double> samples, int sample_rate, int window_len, int hop_len) {
    check_stft_params(window_len, hop_len);
    if (sample_rate <= 0) throw ValidationError("sample_rate must be > 0");
    const auto win = static_cast<std::size_t>(window_len);
    const auto hop = static_cast<std::size_t>(hop_len);
    if (samples.size() < win) throw ValidationError("signal shorter than one window");

    Spectrogram spec;
    spec.window_len = window_len;
    spec.hop_len = hop_len;
    spec.sample_rate = sample_rate;
    spec.frames = 1 + (samples.size() - win) / hop;
    spec.bins = win / 2 + 1;
    spec.magnitudes.resize(spec.frames * spec.bins);
    spec.bin_freqs.resize(spec.bins);
    for (std::size_t b = 0; b < spec.bins; ++b) {
        spec.bin_freqs[b] = static_cast<double>(b) * sample_rate / static_cast<double>(win);
    }
    spec.frame_times.resize(spec.frames);

    const auto& k = simd::active_kernels();
    const auto window = periodic_hann(win);
    detail::RealFft fft(win);
    for (std::size_t f = 0; f < spec.frames; ++f) {
        spec.frame_times[f] = static_cast<double>(f * hop) / sample_rate;
        k.multiply(samples.data() + f * hop, window.data(), fft.time(), win);
        fft.forward();
        k.magnitude(fft.re(), fft.im(), spec.magnitudes.data() + f * spec.bins, spec.bins);
    }
    return spec;
}

SpectralFrames spectral_features(const Spectrogram& spec, double rolloff_fraction) {
    if (!(rolloff_fraction > 0.0 && rolloff_fraction <= 1.0)) {
        throw ValidationError("rolloff_fraction must lie in (0, 1]");
    }
    if (spec.bin_freqs.size() != spec.bins || spec.magnitudes.size() != spec.frames * spec.bins) {
        throw ValidationError("spectrogram dimensions are inconsistent");
    }
    const auto& k = simd::active_kernels();
    SpectralFrames out;
    for (std::size_t f = 0; f < spec.frames; ++f) {
        const double* m = spec.magnitudes.data() + f * spec.bins;
        const simd::WeightedSums s = k.weighted_sums(m, spec.bin_freqs.data(), spec.bins);
        if (!(s.weight > 0.0)) {
            ++out.skipped_frames;
            continue;
        }
        const double centroid = s.weighted_value / s.weight;
        const double spread = k.weighted_spread(m, spec.bin_freqs.data(), centroid, spec.bins);
        // Relative slack keeps an exact-fraction boundary from being missed by rounding.
        const double threshold = rolloff_fraction * s.weight * (1.0 - 1e-12);
        double cumulative = 0.0;
        std::size_t r = spec.bins - 1;
        for (std::size_t b = 0; b < spec.bins; ++b) {
            cumulative += m[b];
            if (cumulative >= threshold) {
                r = b;
                break;
            }
        }
        out.centroid_hz.push_back(centroid);
        out.bandwidth_hz.push_back(std::sqrt(std::max(0.0, spread / s.weight)));
        out.rolloff_hz.push_back(spec.bin_freqs[r]);
    }
    if (out.centroid_hz.empty()) throw ValidationError("no frame with nonzero spectral magnitude");
    return out;
}

TemporalFrames temporal_features(std::span<const double> samples, std::size_t frame_len, std::size_t hop_len) {
    if (frame_len < 2) throw ValidationError("frame_len must be >= 2");
    if (hop_len < 1) throw ValidationError("hop_len must be >= 1");
    if (samples.size() < frame_len) throw ValidationError("signal shorter than one frame");
    const auto& k = simd::active_kernels();
    const std::size_t frames = 1 + (samples.size() - frame_len) / hop_len;
    TemporalFrames out;
    out.zcr.reserve(frames);
    out.rms.reserve(frames);
    out.ste.reserve(frames);
    for (std::size_t f = 0; f < frames; ++f) {
        const double* x = samples.data() + f * hop_len;
        const double ste = k.sum_squares(x, frame_len);
        out.zcr.push_back(static_cast<double>(k.sign_changes(x, frame_len)) / static_cast<double>(frame_len - 1));
        out.rms.push_back(std::sqrt(ste / static_cast<double>(frame_len)));
        out.ste.push_back(ste);
    }
    return out;
}

AcousticFeatureVector summarize_clip(const ingest::AudioSignal& signal, const AcousticConfig& config) {
    config.validate();
    if (signal.sample_rate <= 0) throw ValidationError("sample_rate must be > 0");
    const std::vector<double> mono = downmix(signal);
    const Spectrogram spec = stft(mono, signal.sample_rate, config.window_len, config.hop_len);
    const SpectralFrames sf = spectral_features(spec, config.rolloff_fraction);
    const auto frame_len = static_cast<std::size_t>(std::lround(config.frame_s * signal.sample_rate));
    const auto hop_len = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(config.frame_hop_s * signal.sample_rate)));
    const TemporalFrames tf = temporal_features(mono, frame_len, hop_len);

    AcousticFeatureVector v;
    v.spectral_centroid_hz = mean_of(sf.centroid_hz);
    v.spectral_bandwidth_hz = mean_of(sf.bandwidth_hz);
    v.spectral_rolloff_hz = mean_of(sf.rolloff_hz);
    v.zero_crossing_rate = mean_of(tf.zcr);
    v.rms_amplitude = mean_of(tf.rms);
    v.short_term_energy = mean_of(tf.ste);
    v.skipped_frames = sf.skipped_frames;
    return v;
}

}  // namespace aviary::acoustic
