#include "aviary/ingest/frames.hpp"

#include <cctype>
#include <cmath>
#include <filesystem>
#include <string_view>

#include <fmt/format.h>

#include "aviary/error.hpp"
#include "aviary/ingest/csv.hpp"
#include "json.hpp"

namespace aviary::ingest {

namespace {

[[noreturn]] void fail(const char* what, std::size_t offset) {
    throw ParseError(what, ParseError::Unit::ByteOffset, offset);
}

void skip_space_and_comments(std::span<const unsigned char> b, std::size_t& pos) {
    while (pos < b.size()) {
        if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else if (std::isspace(b[pos]) != 0) {
            ++pos;
        } else {
            break;
        }
    }
}

long read_header_int(std::span<const unsigned char> b, std::size_t& pos) {
    skip_space_and_comments(b, pos);
    const std::size_t start = pos;
    long value = 0;
    while (pos < b.size() && std::isdigit(b[pos]) != 0) {
        value = value * 10 + (b[pos] - '0');
        if (value > 1'000'000) fail("PGM header value too large", start);
        ++pos;
    }
    if (pos == start) fail("malformed PGM header", start);
    return value;
}

}  // namespace

double FrameSequence::duration_s() const noexcept {
    if (timestamps.empty() || manifest.fps <= 0.0) return 0.0;
    return timestamps.back() + 1.0 / manifest.fps;
}

Frame parse_pgm(std::span<const unsigned char> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') fail("non-P5 magic", 0);
    std::size_t pos = 2;
    const long width = read_header_int(bytes, pos);
    const long height = read_header_int(bytes, pos);
    const std::size_t maxval_at = pos;
    const long maxval = read_header_int(bytes, pos);
    if (width <= 0 || height <= 0) fail("invalid PGM dimensions", 2);
    if (maxval <= 0 || maxval > 255) fail("unsupported bit depth", maxval_at);
    if (pos >= bytes.size() || std::isspace(bytes[pos]) == 0) fail("malformed PGM header", pos);
    ++pos;
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (bytes.size() - pos < count) fail("truncated PGM raster", bytes.size());

    Frame frame;
    frame.width = static_cast<int>(width);
    frame.height = static_cast<int>(height);
    frame.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                        bytes.begin() + static_cast<std::ptrdiff_t>(pos + count));
    if (maxval != 255) {
        for (auto& p : frame.pixels) {
            p = static_cast<std::uint8_t>(std::lround(std::min<long>(p, maxval) * 255.0 / maxval));
        }
    }
    return frame;
}

std::vector<unsigned char> write_pgm(const Frame& frame) {
    if (frame.pixels.size() != static_cast<std::size_t>(frame.width) * frame.height) {
        throw ValidationError("write_pgm: pixel count does not match dimensions");
    }
    const std::string header = fmt::format("P5\n{} {}\n255\n", frame.width, frame.height);
    std::vector<unsigned char> out(header.begin(), header.end());
    out.insert(out.end(), frame.pixels.begin(), frame.pixels.end());
    return out;
}

FrameManifest parse_manifest(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed manifest JSON: ") + e.what(),
                         ParseError::Unit::ByteOffset, e.byte);
    }
    if (!j.is_object()) throw ValidationError("manifest must be a JSON object");

    FrameManifest m;
    try {
        m.fps = j.at("fps").get<double>();
        m.width = j.at("width").get<int>();
        m.height = j.at("height").get<int>();
        m.frames = j.at("frames").get<std::vector<std::string>>();
        m.room = j.value("room", 0);
        m.week = j.value("week", 0);
        m.clip_id = j.value("clip_id", std::string{});
        if (j.contains("day")) m.day = j.at("day").get<int>();
        if (j.contains("timestamps")) m.timestamps = j.at("timestamps").get<std::vector<double>>();
        if (j.contains("start_time")) m.start_time = j.at("start_time").get<std::string>();
        if (j.contains("entry_start_s")) m.entry_start_s = j.at("entry_start_s").get<double>();
        if (j.contains("entry_end_s")) m.entry_end_s = j.at("entry_end_s").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("invalid manifest: ") + e.what());
    }
    if (!(m.fps > 0.0) || !std::isfinite(m.fps)) throw ValidationError("manifest fps must be > 0");
    if (m.width <= 0 || m.height <= 0) throw ValidationError("manifest width/height must be > 0");
    if (m.frames.empty()) throw ValidationError("manifest lists no frames");
    if (m.start_time && !parse_timestamp(*m.start_time)) {
        throw ValidationError("manifest start_time is not an ISO-8601 date-time");
    }
    if (!m.timestamps.empty()) {
        if (m.timestamps.size() != m.frames.size()) {
            throw ValidationError("manifest timestamps and frames differ in length");
        }
        const double interval = 1.0 / m.fps;
        for (std::size_t i = 1; i < m.timestamps.size(); ++i) {
            const double step = m.timestamps[i] - m.timestamps[i - 1];
            if (!(step > 0.0) || std::abs(step - interval) > 0.01 * interval) {
                throw ValidationError(
                    fmt::format("timestamp spacing inconsistent with fps at index {}", i));
            }
        }
    }
    return m;
}

std::string manifest_to_json(const FrameManifest& m) {
    nlohmann::ordered_json j;
    j["fps"] = m.fps;
    j["width"] = m.width;
    j["height"] = m.height;
    j["frames"] = m.frames;
    j["room"] = m.room;
    j["week"] = m.week;
    if (m.day) j["day"] = *m.day;
    j["clip_id"] = m.clip_id;
    if (!m.timestamps.empty()) j["timestamps"] = m.timestamps;
    if (m.start_time) j["start_time"] = *m.start_time;
    if (m.entry_start_s) j["entry_start_s"] = *m.entry_start_s;
    if (m.entry_end_s) j["entry_end_s"] = *m.entry_end_s;
    return j.dump(2) + "\n";
}

FrameSequence load_frame_sequence(const std::string& manifest_path) {
    if (!std::filesystem::is_regular_file(manifest_path)) {
        throw IoError("frame manifest not found: " + manifest_path);
    }
    FrameSequence seq;
    seq.manifest = parse_manifest(read_text_file(manifest_path));
    const auto dir = std::filesystem::path(manifest_path).parent_path();

    seq.frames.reserve(seq.manifest.frames.size());
    for (std::size_t i = 0; i < seq.manifest.frames.size(); ++i) {
        const std::string path = (dir / seq.manifest.frames[i]).string();
        if (!std::filesystem::is_regular_file(path)) throw IoError("missing frame file: " + path);
        const auto bytes = read_binary_file(path);
        Frame frame;
        try {
            frame = parse_pgm(bytes);
        } catch (const ParseError& e) {
            throw ValidationError(fmt::format("{} ({})", e.what(), path));
        }
        if (frame.width != seq.manifest.width || frame.height != seq.manifest.height) {
            throw ValidationError(fmt::format("dimension mismatch at index {}", i));
        }
        seq.frames.push_back(std::move(frame));
    }

    if (!seq.manifest.timestamps.empty()) {
        seq.timestamps = seq.manifest.timestamps;
    } else {
        seq.timestamps.resize(seq.frames.size());
        for (std::size_t i = 0; i < seq.frames.size(); ++i) {
            seq.timestamps[i] = static_cast<double>(i) / seq.manifest.fps;
        }
    }
    return seq;
}

}  // namespace aviary::ingest
