#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace fsqkd::detail {

/// Cached FFTW plans per grid size. Plan creation is serialized (FFTW
/// planning is not thread-safe); fftw_execute_dft on distinct buffers is.
class FftPlans {
  public:
    static FftPlans& instance() {
        static FftPlans p;
        return p;
    }

    void forward(std::complex<double>* data, int n) { run(data, n, FFTW_FORWARD); }

    /// Unscaled inverse; caller divides by n*n.
    void inverse(std::complex<double>* data, int n) { run(data, n, FFTW_BACKWARD); }

  private:
    struct Pair {
        fftw_plan fwd = nullptr;
        fftw_plan bwd = nullptr;
    };

    void run(std::complex<double>* data, int n, int sign) {
        const Pair& p = plans_for(n);
        auto* d = reinterpret_cast<fftw_complex*>(data);
        fftw_execute_dft(sign == FFTW_FORWARD ? p.fwd : p.bwd, d, d);
    }

    const Pair& plans_for(int n) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        std::vector<std::complex<double>> scratch(static_cast<std::size_t>(n) * n);
        auto* s = reinterpret_cast<fftw_complex*>(scratch.data());
        Pair p;
        // FFTW_UNALIGNED: plans must accept whatever buffers callers pass.
        p.fwd = fftw_plan_dft_2d(n, n, s, s, FFTW_FORWARD,
                                 FFTW_MEASURE | FFTW_UNALIGNED);
        p.bwd = fftw_plan_dft_2d(n, n, s, s, FFTW_BACKWARD,
                                 FFTW_MEASURE | FFTW_UNALIGNED);
        return plans_.emplace(n, p).first->second;
    }

    std::mutex mutex_;
    std::map<int, Pair> plans_;
};

inline void fft2_inplace(std::vector<std::complex<double>>& data, int n) {
    FftPlans::instance().forward(data.data(), n);
}

inline void ifft2_inplace(std::vector<std::complex<double>>& data, int n) {
    FftPlans::instance().inverse(data.data(), n);
    const double s = 1.0 / (static_cast<double>(n) * n);
    for (auto& v : data) v *= s;
}

}  // namespace fsqkd::detail
