#pragma once

#include <fftw3.h>

#include <cstddef>

namespace aviary::acoustic::detail {

// Split-format real FFT of one fixed length. Plans are created under a global
// lock (the FFTW planner is not reentrant); execution is thread-safe per
// instance. Buffers are owned so every execution sees the planned alignment.
class RealFft {
public:
    explicit RealFft(std::size_t n);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t size() const noexcept { return n_; }
    std::size_t bins() const noexcept { return n_ / 2 + 1; }

    double* time() noexcept { return time_; }
    double* re() noexcept { return re_; }
    double* im() noexcept { return im_; }

    // time() -> re()/im(), unnormalized.
    void forward();
    // re()/im() -> time(), unnormalized (scaled by n). Overwrites re/im.
    void inverse();

private:
    std::size_t n_;
    double* time_ = nullptr;
    double* re_ = nullptr;
    double* im_ = nullptr;
    fftw_plan forward_ = nullptr;
    fftw_plan inverse_ = nullptr;
};

}  // namespace aviary::acoustic::detail
