#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace soundalike {

// Deterministic random source. Wraps std::mt19937_64 (whose output stream is
// fixed by the standard) and draws bounded values by modulo so the same seed
// produces the same sequence on every platform. The modulo bias is
// negligible for the index ranges used here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform index in [0, n)
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

    // uniform double in [0, 1) with 53 bits of precision
    double real01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double real(double lo, double hi) { return lo + (hi - lo) * real01(); }

    // Fisher-Yates, back to front
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices from [0, n), in draw order (partial Fisher-Yates)
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<std::size_t> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + index(n - i);
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

private:
    std::mt19937_64 engine_;
};

// Stream seed for worker i derived from a master seed; golden-ratio stride
// keeps the derived seeds well separated.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t i) {
    return master + 0x9E3779B97F4A7C15ULL * (i + 1);
}

} // namespace soundalike
