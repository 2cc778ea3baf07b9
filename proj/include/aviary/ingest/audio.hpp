#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace aviary::ingest {

// Interleaved PCM samples in [-1, 1].
struct AudioSignal {
    std::vector<double> samples;
    int sample_rate = 0;
    int channels = 1;

    std::size_t frames() const noexcept {
        return channels > 0 ? samples.size() / static_cast<std::size_t>(channels) : 0;
    }
    double duration_s() const noexcept {
        return sample_rate > 0 ? static_cast<double>(frames()) / sample_rate : 0.0;
    }
};

// RIFF/WAVE, format tag 1 (or EXTENSIBLE with a PCM subformat), 16-bit.
// Samples are scaled by 1/32768. Errors are ParseError with a byte offset.
AudioSignal parse_wav(std::span<const unsigned char> bytes);

// Quantizes to 16-bit with round-to-nearest, saturating at the int16 range.
std::vector<unsigned char> write_wav(const AudioSignal& signal);

}  // namespace aviary::ingest
