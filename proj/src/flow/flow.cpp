#include "aviary/flow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "aviary/error.hpp"
#include "aviary/parallel.hpp"
#include "aviary/simd/kernels.hpp"

namespace aviary::flow {

namespace {

constexpr double kBlockSeconds = 30.0;
constexpr double kMinPartialBlock = 15.0;
constexpr double kConditionSeconds = 420.0;
constexpr double kShortWindow = 60.0;
constexpr double kMinTexture = 1e-6;    // gradient energy per pixel
constexpr double kMinDistance = 1e-3;   // densification weight floor
constexpr double kConverged = 1e-3;     // px

struct Plane {
    int w = 0;
    int h = 0;
    std::vector<float> px;

    float at(int x, int y) const { return px[static_cast<std::size_t>(y) * w + x]; }
    float clamped(int x, int y) const { return at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)); }
};

// Edge-replicated copy with `pad` extra samples on every side.
struct Padded {
    int w = 0;
    int h = 0;
    int pad = 0;
    std::ptrdiff_t stride = 0;
    std::vector<float> data;

    Padded(const Plane& p, int margin) : w(p.w), h(p.h), pad(margin), stride(p.w + 2 * margin) {
        data.resize(static_cast<std::size_t>(stride) * (h + 2 * pad));
        for (int y = -pad; y < h + pad; ++y) {
            float* row = data.data() + (y + pad) * stride;
            for (int x = -pad; x < w + pad; ++x) row[x + pad] = p.clamped(x, y);
        }
    }
    const float* ptr(int x, int y) const { return data.data() + (y + pad) * stride + (x + pad); }
};

Plane to_plane(const ingest::Frame& f) {
    Plane p{f.width, f.height, std::vector<float>(f.pixels.size())};
    for (std::size_t i = 0; i < f.pixels.size(); ++i) p.px[i] = static_cast<float>(f.pixels[i]) / 255.0f;
    return p;
}

Plane downsample(const Plane& src) {
    const auto& k = simd::active_kernels();
    std::vector<float> rows(src.px.size());
    for (int y = 0; y < src.h; ++y) {
        k.blur_row5(src.px.data() + static_cast<std::size_t>(y) * src.w, rows.data() + static_cast<std::size_t>(y) * src.w,
                    static_cast<std::size_t>(src.w));
    }
    Plane out{src.w / 2, src.h / 2, {}};
    out.px.resize(static_cast<std::size_t>(out.w) * out.h);
    auto row = [&](int y) { return rows.data() + static_cast<std::size_t>(std::clamp(y, 0, src.h - 1)) * src.w; };
    for (int y = 0; y < out.h; ++y) {
        const int sy = 2 * y;
        const float *r0 = row(sy - 2), *r1 = row(sy - 1), *r2 = row(sy), *r3 = row(sy + 1), *r4 = row(sy + 2);
        for (int x = 0; x < out.w; ++x) {
            const int sx = 2 * x;
            out.px[static_cast<std::size_t>(y) * out.w + x] =
                (r0[sx] + 4.0f * r1[sx] + 6.0f * r2[sx] + 4.0f * r3[sx] + r4[sx]) * (1.0f / 16.0f);
        }
    }
    return out;
}

struct Field {
    int w = 0;
    int h = 0;
    std::vector<float> dx;
    std::vector<float> dy;

    Field(int width, int height)
        : w(width), h(height), dx(static_cast<std::size_t>(width) * height, 0.0f), dy(dx.size(), 0.0f) {}

    // Bilinear with clamped coordinates.
    std::pair<float, float> sample(double x, double y) const {
        x = std::clamp(x, 0.0, static_cast<double>(w - 1));
        y = std::clamp(y, 0.0, static_cast<double>(h - 1));
        const int x0 = std::min(static_cast<int>(x), w - 1);
        const int y0 = std::min(static_cast<int>(y), h - 1);
        const int x1 = std::min(x0 + 1, w - 1);
        const int y1 = std::min(y0 + 1, h - 1);
        const auto ax = static_cast<float>(x - x0);
        const auto ay = static_cast<float>(y - y0);
        auto lerp2 = [&](const std::vector<float>& v) {
            const float top = v[y0 * w + x0] * (1.0f - ax) + v[y0 * w + x1] * ax;
            const float bot = v[y1 * w + x0] * (1.0f - ax) + v[y1 * w + x1] * ax;
            return top * (1.0f - ay) + bot * ay;
        };
        return {lerp2(dx), lerp2(dy)};
    }
};

Field upsample(const Field& coarse, int w, int h) {
    Field fine(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto [u, v] = coarse.sample((x + 0.5) / 2.0 - 0.5, (y + 0.5) / 2.0 - 0.5);
            fine.dx[static_cast<std::size_t>(y) * w + x] = 2.0f * u;
            fine.dy[static_cast<std::size_t>(y) * w + x] = 2.0f * v;
        }
    }
    return fine;
}

std::vector<int> patch_origins(int extent, int size, int stride) {
    std::vector<int> out;
    for (int p = 0; p + size <= extent; p += stride) out.push_back(p);
    if (out.back() != extent - size) out.push_back(extent - size);
    return out;
}

Field refine_level(const Plane& prev, const Plane& next, const Field& init, const FlowParams& params) {
    const auto& k = simd::active_kernels();
    const int ps = params.patch_size;
    const int margin = 2 * ps + 2;
    const Padded target(next, margin);
    const double lo = -margin;
    const double hi_x = next.w + margin - ps - 2;
    const double hi_y = next.h + margin - ps - 2;
    const double center_offset = (ps - 1) / 2.0;

    const std::size_t n = static_cast<std::size_t>(ps) * ps;
    std::vector<float> tmpl(n), gx(n), gy(n);
    std::vector<double> acc_w(prev.px.size(), 0.0), acc_dx(prev.px.size(), 0.0), acc_dy(prev.px.size(), 0.0);

    auto residual = [&](int x0, int y0, double u, double v) {
        const double px = std::clamp(x0 + u, lo, hi_x);
        const double py = std::clamp(y0 + v, lo, hi_y);
        const int ix = static_cast<int>(std::floor(px));
        const int iy = static_cast<int>(std::floor(py));
        return k.patch_residual(target.ptr(ix, iy), target.stride, static_cast<float>(px - ix),
                                static_cast<float>(py - iy), tmpl.data(), gx.data(), gy.data(), ps);
    };

    for (int y0 : patch_origins(prev.h, ps, params.patch_stride)) {
        for (int x0 : patch_origins(prev.w, ps, params.patch_stride)) {
            double sxx = 0.0, sxy = 0.0, syy = 0.0;
            for (int j = 0; j < ps; ++j) {
                for (int i = 0; i < ps; ++i) {
                    const int x = x0 + i, y = y0 + j;
                    const std::size_t t = static_cast<std::size_t>(j) * ps + i;
                    tmpl[t] = prev.at(x, y);
                    gx[t] = 0.5f * (prev.clamped(x + 1, y) - prev.clamped(x - 1, y));
                    gy[t] = 0.5f * (prev.clamped(x, y + 1) - prev.clamped(x, y - 1));
                    sxx += static_cast<double>(gx[t]) * gx[t];
                    sxy += static_cast<double>(gx[t]) * gy[t];
                    syy += static_cast<double>(gy[t]) * gy[t];
                }
            }

            double u = 0.0, v = 0.0;
            const double cx = x0 + center_offset;
            const double cy = y0 + center_offset;
            if ((sxx + syy) / static_cast<double>(n) >= kMinTexture) {
                const auto [u0f, v0f] = init.sample(cx, cy);
                const double u0 = std::clamp(static_cast<double>(u0f), lo - x0, hi_x - x0);
                const double v0 = std::clamp(static_cast<double>(v0f), lo - y0, hi_y - y0);
                // Tikhonov term keeps the aperture-limited direction near the prior.
                const double lambda = 1e-4 * (sxx + syy) + 1e-12;
                const double a = sxx + lambda, b = sxy, d = syy + lambda;
                const double det = a * d - b * b;
                u = u0;
                v = v0;
                const double start_error = residual(x0, y0, u0, v0).e2;
                for (int it = 0; it < params.iterations; ++it) {
                    const auto s = residual(x0, y0, u, v);
                    const double du = (d * s.gx_e - b * s.gy_e) / det;
                    const double dv = (a * s.gy_e - b * s.gx_e) / det;
                    u = std::clamp(u - du, lo - x0, hi_x - x0);
                    v = std::clamp(v - dv, lo - y0, hi_y - y0);
                    if (du * du + dv * dv < kConverged * kConverged) break;
                }
                if (!(residual(x0, y0, u, v).e2 <= start_error)) {
                    u = u0;
                    v = v0;
                }
            }

            for (int j = 0; j < ps; ++j) {
                for (int i = 0; i < ps; ++i) {
                    const int x = x0 + i, y = y0 + j;
                    const double w = 1.0 / std::max(std::hypot(x - cx, y - cy), kMinDistance);
                    const std::size_t p = static_cast<std::size_t>(y) * prev.w + x;
                    acc_w[p] += w;
                    acc_dx[p] += w * u;
                    acc_dy[p] += w * v;
                }
            }
        }
    }

    Field out(prev.w, prev.h);
    for (std::size_t p = 0; p < acc_w.size(); ++p) {
        out.dx[p] = static_cast<float>(acc_dx[p] / acc_w[p]);
        out.dy[p] = static_cast<float>(acc_dy[p] / acc_w[p]);
    }
    return out;
}

void check_frame(const ingest::Frame& f, const char* name) {
    if (f.width <= 0 || f.height <= 0 ||
        f.pixels.size() != static_cast<std::size_t>(f.width) * static_cast<std::size_t>(f.height)) {
        throw ValidationError(fmt::format("{} frame has inconsistent dimensions", name));
    }
}

double block_mean(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double window_intensity(const MotionIntensitySeries& series, const Window& window) {
    const double length = window.length();
    const auto full_blocks = static_cast<int>(std::floor(length / kBlockSeconds));
    const double remainder = length - full_blocks * kBlockSeconds;
    struct Block {
        double start, end;
        std::vector<double> values;
    };
    std::vector<Block> blocks;
    for (int b = 0; b < full_blocks; ++b) {
        blocks.push_back({window.start + b * kBlockSeconds, window.start + (b + 1) * kBlockSeconds, {}});
    }
    if (remainder > 0.0 && (remainder >= kMinPartialBlock || full_blocks == 0)) {
        blocks.push_back({window.start + full_blocks * kBlockSeconds, window.end, {}});
    }
    bool any = false;
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        const double t = series.timestamps[i];
        if (t < window.start || t >= window.end) continue;
        any = true;
        for (auto& b : blocks) {
            if (t >= b.start && t < b.end) {
                b.values.push_back(series.values[i]);
                break;
            }
        }
    }
    std::vector<double> means;
    for (auto& b : blocks) {
        if (!b.values.empty()) means.push_back(block_mean(std::move(b.values)));
    }
    if (!any || means.empty()) {
        throw ValidationError(fmt::format("no frames in condition [{}, {})", window.start, window.end));
    }
    return block_mean(std::move(means));
}

}  // namespace

void FlowParams::validate() const {
    if (pyramid_levels < 1) throw ValidationError("flow.pyramid_levels must be >= 1");
    if (patch_size < 4) throw ValidationError("flow.patch_size must be >= 4");
    if (patch_stride < 1 || patch_stride > patch_size) {
        throw ValidationError("flow.patch_stride must be in [1, patch_size]");
    }
    if (iterations < 1) throw ValidationError("flow.iterations must be >= 1");
    if (!(entry_duration_s > 0.0) || !std::isfinite(entry_duration_s)) {
        throw ValidationError("flow.entry_duration_s must be positive");
    }
}

FlowField dense_flow(const ingest::Frame& prev, const ingest::Frame& next, const FlowParams& params) {
    params.validate();
    check_frame(prev, "previous");
    check_frame(next, "next");
    if (prev.width != next.width || prev.height != next.height) {
        throw ValidationError(fmt::format("dimension mismatch: {}x{} vs {}x{}", prev.width, prev.height,
                                          next.width, next.height));
    }

    std::vector<Plane> a{to_plane(prev)};
    std::vector<Plane> b{to_plane(next)};
    for (int l = 1; l < params.pyramid_levels; ++l) {
        a.push_back(downsample(a.back()));
        b.push_back(downsample(b.back()));
    }
    if (a.back().w < params.patch_size || a.back().h < params.patch_size) {
        throw ValidationError(fmt::format("frame smaller than one patch at the coarsest level ({}x{} < {})",
                                          a.back().w, a.back().h, params.patch_size));
    }

    Field field(a.back().w, a.back().h);
    for (int l = params.pyramid_levels - 1; l >= 0; --l) {
        const auto& pa = a[static_cast<std::size_t>(l)];
        if (field.w != pa.w || field.h != pa.h) field = upsample(field, pa.w, pa.h);
        field = refine_level(pa, b[static_cast<std::size_t>(l)], field, params);
    }
    return FlowField{field.w, field.h, std::move(field.dx), std::move(field.dy)};
}

double motion_magnitude(const FlowField& field) {
    if (field.dx.empty()) return 0.0;
    return simd::magnitude_sum(field.dx, field.dy) / static_cast<double>(field.dx.size());
}

MotionIntensitySeries motion_series(const ingest::FrameSequence& sequence, const FlowParams& params,
                                    bool parallel_pairs) {
    params.validate();
    if (sequence.frames.size() < 2) throw ValidationError("frame sequence needs at least two frames");
    MotionIntensitySeries series;
    series.clip_id = sequence.manifest.clip_id;
    series.room = sequence.manifest.room;
    series.week = sequence.manifest.week;
    series.day = sequence.manifest.day.value_or(0);
    const std::size_t pairs = sequence.frames.size() - 1;
    series.values.resize(pairs);
    series.timestamps.resize(pairs);
    auto pair = [&](std::size_t i) {
        series.values[i] = motion_magnitude(dense_flow(sequence.frames[i], sequence.frames[i + 1], params));
        series.timestamps[i] = 0.5 * (sequence.timestamps[i] + sequence.timestamps[i + 1]);
    };
    if (parallel_pairs) {
        parallel_for(pairs, pair);
    } else {
        for (std::size_t i = 0; i < pairs; ++i) pair(i);
    }
    return series;
}

EntrySegmentation segment_clip(double clip_duration, double entry_start, double entry_end) {
    if (!std::isfinite(clip_duration) || !std::isfinite(entry_start) || !std::isfinite(entry_end) ||
        !(entry_start > 0.0) || !(entry_start < entry_end) || !(entry_end <= clip_duration)) {
        throw ValidationError(fmt::format("entry interval outside the clip: [{}, {}) in {} s", entry_start,
                                          entry_end, clip_duration));
    }
    auto make = [](double start, double end, bool truncated) {
        return Window{start, end, end - start < kShortWindow, truncated};
    };
    EntrySegmentation seg;
    seg.before = make(std::max(0.0, entry_start - kConditionSeconds), entry_start, entry_start < kConditionSeconds);
    seg.during = make(entry_start, entry_end, false);
    seg.after = make(entry_end, std::min(clip_duration, entry_end + kConditionSeconds),
                     clip_duration - entry_end < kConditionSeconds);
    return seg;
}

ConditionIntensity condition_intensity(const MotionIntensitySeries& series, const EntrySegmentation& seg) {
    if (series.values.size() != series.timestamps.size()) {
        throw ValidationError("motion series values and timestamps differ in length");
    }
    return {window_intensity(series, seg.before), window_intensity(series, seg.during),
            window_intensity(series, seg.after)};
}

}  // namespace aviary::flow
