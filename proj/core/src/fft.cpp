#include "soundalike/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace soundalike {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Fft::Fft(std::size_t n) : n_(n) {
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft size must be a power of two");
    bitrev_.resize(n);
    std::size_t log2n = 0;
    while ((std::size_t{1} << log2n) < n) ++log2n;
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < log2n; ++b)
            if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
        bitrev_[i] = r;
    }
    twiddle_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k) {
        double ang = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
        twiddle_[k] = {std::cos(ang), std::sin(ang)};
    }
}

void Fft::forward(std::vector<std::complex<double>>& buf) const {
    for (std::size_t i = 0; i < n_; ++i) {
        std::size_t j = bitrev_[i];
        if (i < j) std::swap(buf[i], buf[j]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
        std::size_t stride = n_ / len;
        for (std::size_t start = 0; start < n_; start += len) {
            for (std::size_t k = 0; k < len / 2; ++k) {
                auto w = twiddle_[k * stride];
                auto a = buf[start + k];
                auto b = buf[start + k + len / 2] * w;
                buf[start + k] = a + b;
                buf[start + k + len / 2] = a - b;
            }
        }
    }
}

std::vector<double> Fft::real_magnitudes(const std::vector<double>& signal,
                                         std::size_t bins) const {
    std::vector<std::complex<double>> buf(n_, {0.0, 0.0});
    std::size_t copy = signal.size() < n_ ? signal.size() : n_;
    for (std::size_t i = 0; i < copy; ++i) buf[i] = {signal[i], 0.0};
    forward(buf);
    std::vector<double> mags(bins);
    for (std::size_t i = 0; i < bins; ++i) mags[i] = std::abs(buf[i]);
    return mags;
}

} // namespace soundalike
