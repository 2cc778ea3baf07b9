#include "aviary/synth/texture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "aviary/error.hpp"
#include "aviary/synth/rng.hpp"

namespace aviary::synth {

Texture::Texture(int width, int height, std::uint64_t seed, int components, double min_wavelength)
    : width_(width), height_(height) {
    if (width < 2 || height < 2) throw ValidationError("texture needs at least 2x2 pixels");
    if (components < 1) throw ValidationError("texture needs at least one component");
    Rng rng(seed);
    const int max_kx = std::max(1, static_cast<int>(width / min_wavelength));
    const int max_ky = std::max(1, static_cast<int>(height / min_wavelength));
    double power = 0.0;
    while (static_cast<int>(waves_.size()) < components) {
        const int a = static_cast<int>(rng.uniform_int(-max_kx, max_kx));
        const int b = static_cast<int>(rng.uniform_int(-max_ky, max_ky));
        const double p = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double m = rng.uniform(0.3, 1.0);
        const double cycles_x = static_cast<double>(a) / width;
        const double cycles_y = static_cast<double>(b) / height;
        // Skip DC and anything shorter than the wavelength floor.
        if (a == 0 && b == 0) continue;
        if (std::hypot(cycles_x, cycles_y) * min_wavelength > 1.0) continue;
        waves_.push_back({2.0 * std::numbers::pi * cycles_x, 2.0 * std::numbers::pi * cycles_y, p, m});
        power += 0.5 * m * m;
    }
    norm_ = 1.0 / (2.5 * std::sqrt(power));
}

double Texture::value(double x, double y, double sx, double sy) const {
    double acc = 0.0;
    for (const auto& w : waves_) acc += w.amplitude * std::cos(w.fx * (x - sx) + w.fy * (y - sy) + w.phase);
    return acc * norm_;
}

ingest::Frame Texture::render(double sx, double sy, double contrast) const {
    // cos(A + B) = cos A cos B - sin A sin B with per-row and per-column tables.
    const auto w = static_cast<std::size_t>(width_);
    const auto h = static_cast<std::size_t>(height_);
    std::vector<double> acc(w * h, 0.0);
    std::vector<double> cx(w), snx(w), cy(h), sny(h);
    for (const auto& wave : waves_) {
        for (std::size_t x = 0; x < w; ++x) {
            const double a = wave.fx * (static_cast<double>(x) - sx) + wave.phase;
            cx[x] = wave.amplitude * std::cos(a);
            snx[x] = wave.amplitude * std::sin(a);
        }
        for (std::size_t y = 0; y < h; ++y) {
            const double b = wave.fy * (static_cast<double>(y) - sy);
            cy[y] = std::cos(b);
            sny[y] = std::sin(b);
        }
        for (std::size_t y = 0; y < h; ++y) {
            double* row = acc.data() + y * w;
            for (std::size_t x = 0; x < w; ++x) row[x] += cx[x] * cy[y] - snx[x] * sny[y];
        }
    }
    ingest::Frame f{width_, height_, std::vector<std::uint8_t>(w * h)};
    for (std::size_t i = 0; i < w * h; ++i) {
        const double g = 127.5 + contrast * norm_ * acc[i];
        f.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::nearbyint(g), 0.0, 255.0));
    }
    return f;
}

}  // namespace aviary::synth
