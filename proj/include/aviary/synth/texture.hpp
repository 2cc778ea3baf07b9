#pragma once

#include <cstdint>
#include <vector>

#include "aviary/ingest/frames.hpp"

namespace aviary::synth {

// Sum of random plane waves with whole cycles across the frame, so rendering
// at shift (sx, sy) equals a wrap-around translation of the unshifted frame.
// Wavelengths stay at or above min_wavelength pixels.
class Texture {
public:
    Texture(int width, int height, std::uint64_t seed, int components = 48, double min_wavelength = 10.0);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }

    // Intensity in roughly [-1, 1] at continuous position (x - sx, y - sy).
    double value(double x, double y, double sx, double sy) const;

    // 8-bit frame centred on mid-grey with the given contrast (grey levels per
    // unit intensity), clamped to [0, 255].
    ingest::Frame render(double sx, double sy, double contrast = 90.0) const;

private:
    struct Wave {
        double fx, fy, phase, amplitude;
    };
    int width_;
    int height_;
    std::vector<Wave> waves_;
    double norm_ = 1.0;
};

}  // namespace aviary::synth
