#include "fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace sugar::detail {

namespace {
// FFTW planning is not reentrant; execution of distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

Spectrum fft2(const ImageField& f) {
    const int rows = int(f.rows()), cols = int(f.cols());
    const int half = cols / 2 + 1;
    ImageField in = f;
    Spectrum out(std::size_t(rows) * half);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_r2c_2d(rows, cols, in.data(), reinterpret_cast<fftw_complex*>(out.data()),
                                    FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

ImageField ifft2(const Spectrum& s, int rows, int cols) {
    Spectrum in = s;  // c2r overwrites its input
    ImageField out(rows, cols);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_c2r_2d(rows, cols, reinterpret_cast<fftw_complex*>(in.data()), out.data(),
                                    FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    out /= double(rows) * double(cols);
    return out;
}

}  // namespace sugar::detail
