#pragma once

#include <string>
#include <vector>

#include "aviary/ingest/frames.hpp"

namespace aviary::flow {

struct FlowParams {
    int pyramid_levels = 3;
    int patch_size = 8;
    int patch_stride = 4;
    int iterations = 12;       // gradient-descent steps per patch and level
    double entry_duration_s = 90.0;  // used when only the entry start is known

    // Throws ValidationError naming the offending field.
    void validate() const;
};

// Per-pixel displacement from prev to next, row-major, in pixels.
struct FlowField {
    int width = 0;
    int height = 0;
    std::vector<float> dx;
    std::vector<float> dy;
};

struct MotionIntensitySeries {
    std::string clip_id;
    int room = 0;
    int week = 0;
    int day = 0;
    std::vector<double> values;      // mean |flow| per consecutive frame pair
    std::vector<double> timestamps;  // midpoint of each pair, seconds from clip start
};

struct Window {
    double start = 0.0;  // inclusive
    double end = 0.0;    // exclusive
    bool short_window = false;  // shorter than 60 s
    bool truncated = false;     // before/after clamped by the clip below seven minutes

    double length() const noexcept { return end - start; }
};

struct EntrySegmentation {
    Window before;
    Window during;
    Window after;
};

struct ConditionIntensity {
    double before = 0.0;
    double during = 0.0;
    double after = 0.0;
};

// Coarse-to-fine patch inverse search. Throws ValidationError on
// "dimension mismatch" or when the coarsest level is smaller than one patch.
FlowField dense_flow(const ingest::Frame& prev, const ingest::Frame& next, const FlowParams& params = {});

// Mean over pixels of sqrt(dx^2 + dy^2).
double motion_magnitude(const FlowField& field);

// Flow over every consecutive frame pair; pairs run in parallel unless
// parallel_pairs is false. Output order follows the frames either way.
MotionIntensitySeries motion_series(const ingest::FrameSequence& sequence, const FlowParams& params = {},
                                    bool parallel_pairs = true);

// Seven-minute windows either side of the entry, clamped to the clip.
// Throws ValidationError("entry interval outside the clip").
EntrySegmentation segment_clip(double clip_duration, double entry_start, double entry_end);

// Per condition: mean of 30 s block means; a trailing partial block is kept
// when it spans at least 15 s or is the only block. A value belongs to the
// window containing its timestamp. Throws ValidationError("no frames in
// condition").
ConditionIntensity condition_intensity(const MotionIntensitySeries& series, const EntrySegmentation& seg);

}  // namespace aviary::flow
