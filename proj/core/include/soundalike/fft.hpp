#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace soundalike {

// Iterative radix-2 FFT with precomputed twiddle and bit-reversal tables.
// Size must be a power of two.
class Fft {
public:
    explicit Fft(std::size_t n);

    std::size_t size() const { return n_; }

    // In-place forward transform.
    void forward(std::vector<std::complex<double>>& buf) const;

    // Magnitudes of the first `bins` output bins of a real signal,
    // zero-padded to the transform size.
    std::vector<double> real_magnitudes(const std::vector<double>& signal,
                                        std::size_t bins) const;

private:
    std::size_t n_;
    std::vector<std::size_t> bitrev_;
    std::vector<std::complex<double>> twiddle_; // e^{-2πik/n}, k in [0, n/2)
};

} // namespace soundalike
