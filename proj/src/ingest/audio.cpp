#include "aviary/ingest/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string_view>

#include "aviary/error.hpp"

namespace aviary::ingest {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

[[noreturn]] void fail(const char* what, std::size_t offset) {
    throw ParseError(what, ParseError::Unit::ByteOffset, offset);
}

std::uint16_t u16(std::span<const unsigned char> b, std::size_t at) {
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t u32(std::span<const unsigned char> b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) |
           (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

bool tag_is(std::span<const unsigned char> b, std::size_t at, std::string_view tag) {
    return std::equal(tag.begin(), tag.end(), b.begin() + static_cast<std::ptrdiff_t>(at),
                      [](char c, unsigned char u) { return static_cast<unsigned char>(c) == u; });
}

void put16(std::vector<unsigned char>& out, std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xFF));
    out.push_back(static_cast<unsigned char>(v >> 8));
}

void put32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out.push_back(static_cast<unsigned char>((v >> s) & 0xFF));
}

void put_tag(std::vector<unsigned char>& out, std::string_view tag) {
    for (char c : tag) out.push_back(static_cast<unsigned char>(c));
}

struct Format {
    int channels = 0;
    int sample_rate = 0;
};

}  // namespace

AudioSignal parse_wav(std::span<const unsigned char> bytes) {
    if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
        fail("malformed RIFF header", 0);
    }

    std::optional<Format> format;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::size_t header_at = pos;
        const std::uint32_t size = u32(bytes, pos + 4);
        const std::size_t body = pos + 8;

        if (tag_is(bytes, pos, "fmt ")) {
            if (size < 16 || body + size > bytes.size()) fail("malformed fmt chunk", header_at);
            std::uint16_t tag = u16(bytes, body);
            if (tag == kFormatExtensible && size >= 40) tag = u16(bytes, body + 24);
            if (tag != kFormatPcm) fail("non-PCM format tag", body);
            const std::uint16_t channels = u16(bytes, body + 2);
            const std::uint32_t rate = u32(bytes, body + 4);
            const std::uint16_t bits = u16(bytes, body + 14);
            if (bits != 16) fail("unsupported bit depth", body + 14);
            if (channels == 0) fail("zero channel count", body + 2);
            if (rate == 0 || rate > 1'000'000) fail("invalid sample rate", body + 4);
            format = Format{channels, static_cast<int>(rate)};
        } else if (tag_is(bytes, pos, "data")) {
            if (!format) fail("data chunk before fmt chunk", header_at);
            const std::size_t frame_bytes = 2 * static_cast<std::size_t>(format->channels);
            if (body + size > bytes.size()) fail("truncated data chunk", header_at);
            if (size == 0) fail("empty data chunk", header_at);
            if (size % frame_bytes != 0) fail("truncated data chunk", body + size - size % frame_bytes);

            AudioSignal signal;
            signal.sample_rate = format->sample_rate;
            signal.channels = format->channels;
            signal.samples.resize(size / 2);
            for (std::size_t i = 0; i < signal.samples.size(); ++i) {
                const auto raw = static_cast<std::int16_t>(u16(bytes, body + 2 * i));
                signal.samples[i] = static_cast<double>(raw) / 32768.0;
            }
            return signal;
        }
        pos = body + size + (size & 1u);
    }
    if (!format) fail("missing fmt chunk", pos);
    fail("missing data chunk", pos);
}

std::vector<unsigned char> write_wav(const AudioSignal& signal) {
    if (signal.channels < 1 || signal.sample_rate <= 0) {
        throw ValidationError("write_wav: invalid channel count or sample rate");
    }
    const auto data_bytes = static_cast<std::uint32_t>(signal.samples.size() * 2);
    const auto block_align = static_cast<std::uint16_t>(2 * signal.channels);
    std::vector<unsigned char> out;
    out.reserve(44 + data_bytes);
    put_tag(out, "RIFF");
    put32(out, 36 + data_bytes);
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put32(out, 16);
    put16(out, kFormatPcm);
    put16(out, static_cast<std::uint16_t>(signal.channels));
    put32(out, static_cast<std::uint32_t>(signal.sample_rate));
    put32(out, static_cast<std::uint32_t>(signal.sample_rate) * block_align);
    put16(out, block_align);
    put16(out, 16);
    put_tag(out, "data");
    put32(out, data_bytes);
    for (double s : signal.samples) {
        const double scaled = std::nearbyint(s * 32768.0);
        const auto q = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
        put16(out, static_cast<std::uint16_t>(q));
    }
    return out;
}

}  // namespace aviary::ingest
