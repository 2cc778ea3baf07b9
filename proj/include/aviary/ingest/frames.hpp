#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace aviary::ingest {

// Row-major 8-bit grayscale.
struct Frame {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

// Manifest JSON, e.g.
//   {"fps": 30, "width": 640, "height": 360, "frames": ["f000001.pgm", ...],
//    "room": 1, "week": 5, "clip_id": "w05d1"}
// Optional keys: "day", "timestamps" (seconds from clip start), "start_time"
// (ISO date-time of the first frame), "entry_start_s"/"entry_end_s" (caretaker
// entry window in clip seconds). Frame paths are relative to the manifest.
struct FrameManifest {
    double fps = 0.0;
    int width = 0;
    int height = 0;
    std::vector<std::string> frames;
    int room = 0;
    int week = 0;
    std::optional<int> day;
    std::string clip_id;
    std::vector<double> timestamps;
    std::optional<std::string> start_time;
    std::optional<double> entry_start_s;
    std::optional<double> entry_end_s;
};

struct FrameSequence {
    FrameManifest manifest;
    std::vector<Frame> frames;
    std::vector<double> timestamps;  // seconds from clip start, strictly increasing

    double fps() const noexcept { return manifest.fps; }
    int width() const noexcept { return manifest.width; }
    int height() const noexcept { return manifest.height; }
    // Time covered by the frames: last timestamp plus one frame interval.
    double duration_s() const noexcept;
};

// Binary P5 with maxval <= 255. Errors are ParseError with a byte offset.
Frame parse_pgm(std::span<const unsigned char> bytes);
std::vector<unsigned char> write_pgm(const Frame& frame);

FrameManifest parse_manifest(const std::string& json_text);
std::string manifest_to_json(const FrameManifest& manifest);

// Throws IoError for a missing manifest or frame file (the message names the
// path) and ValidationError for fps <= 0 or "dimension mismatch at index i".
FrameSequence load_frame_sequence(const std::string& manifest_path);

}  // namespace aviary::ingest
