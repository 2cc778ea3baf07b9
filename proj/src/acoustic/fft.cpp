#include "fft.hpp"

#include <mutex>
#include <new>

namespace aviary::acoustic::detail {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

RealFft::RealFft(std::size_t n) : n_(n) {
    time_ = static_cast<double*>(fftw_malloc(sizeof(double) * n));
    re_ = static_cast<double*>(fftw_malloc(sizeof(double) * bins()));
    im_ = static_cast<double*>(fftw_malloc(sizeof(double) * bins()));
    if (time_ == nullptr || re_ == nullptr || im_ == nullptr) {
        fftw_free(time_);
        fftw_free(re_);
        fftw_free(im_);
        throw std::bad_alloc();
    }
    fftw_iodim dim{static_cast<int>(n), 1, 1};
    std::lock_guard<std::mutex> lock(planner_mutex());
    forward_ = fftw_plan_guru_split_dft_r2c(1, &dim, 0, nullptr, time_, re_, im_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_guru_split_dft_c2r(1, &dim, 0, nullptr, re_, im_, time_, FFTW_ESTIMATE);
}

RealFft::~RealFft() {
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(inverse_);
    }
    fftw_free(time_);
    fftw_free(re_);
    fftw_free(im_);
}

void RealFft::forward() { fftw_execute_split_dft_r2c(forward_, time_, re_, im_); }

void RealFft::inverse() { fftw_execute_split_dft_c2r(inverse_, re_, im_, time_); }

}  // namespace aviary::acoustic::detail
