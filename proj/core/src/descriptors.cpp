#include "soundalike/descriptors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <memory>
#include <mutex>
#include <numbers>

#include "soundalike/dtw.hpp"
#include "soundalike/errors.hpp"

namespace soundalike {

namespace {

// Krumhansl-Schmuckler probe-tone ratings, anchored at the tonic.
constexpr std::array<double, 12> kMajorTemplate = {
    6.35, 2.23, 3.48, 2.33, 4.38, 4.09, 2.52, 5.19, 2.39, 3.66, 2.29, 2.88};
constexpr std::array<double, 12> kMinorTemplate = {
    6.33, 2.68, 3.52, 5.38, 2.60, 3.53, 2.54, 4.75, 3.98, 2.69, 3.34, 3.17};

constexpr std::size_t kMelFilters = 40;
constexpr std::size_t kMfccCoeffs = 13;
constexpr double kMelHighHz = 8000.0;
constexpr double kLogFloor = 1e-10;
constexpr double kChromaLowHz = 27.5;

} // namespace

KeyProfileTable::KeyProfileTable() {
    for (std::size_t tonic = 0; tonic < kClasses; ++tonic) {
        for (std::size_t m = 0; m < kClasses; ++m) {
            std::size_t pc = (tonic + m) % kClasses;
            profiles_[tonic][pc] = kMajorTemplate[m];
            profiles_[kClasses + tonic][pc] = kMinorTemplate[m];
        }
    }
}

const KeyProfileTable& KeyProfileTable::instance() {
    static const KeyProfileTable table;
    return table;
}

std::span<const double, KeyProfileTable::kClasses> KeyProfileTable::profile(
    std::size_t key) const {
    if (key >= kKeyCount) throw DataError("key profile index out of range");
    return std::span<const double, kClasses>(profiles_[key]);
}

double zero_crossing_rate(std::span<const double> frame) {
    if (frame.size() < 2) throw DataError("zero_crossing_rate: frame too short");
    int prev = 0;
    std::size_t crossings = 0;
    for (double x : frame) {
        int sign = x > 0.0 ? 1 : (x < 0.0 ? -1 : prev);
        if (prev != 0 && sign != 0 && sign != prev) ++crossings;
        if (sign != 0) prev = sign;
    }
    return static_cast<double>(crossings) / static_cast<double>(frame.size() - 1);
}

std::size_t spectral_rolloff(std::span<const double> column, double fraction) {
    if (column.empty()) throw DataError("spectral_rolloff: empty column");
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw DataError("spectral_rolloff: fraction must be in (0, 1]");
    double total = 0.0;
    for (double v : column) total += v * v;
    if (total == 0.0) return 0;
    const double target = fraction * total;
    double cum = 0.0;
    for (std::size_t i = 0; i < column.size(); ++i) {
        cum += column[i] * column[i];
        if (cum >= target) return i;
    }
    return column.size() - 1; // rounding slack: the scan can fall short of target
}

double spectral_entropy(std::span<const double> column) {
    if (column.size() < 2) throw DataError("spectral_entropy: column too short");
    double total = 0.0;
    for (double v : column) total += v;
    if (total == 0.0) return 0.0;
    // base-2 logs keep the two-bin and uniform cases exact: log2 of a power
    // of two carries no rounding, so h / log2(n) lands on the closed form
    double h = 0.0;
    for (double v : column) {
        if (v > 0.0) {
            double p = v / total;
            h -= p * std::log2(p);
        }
    }
    return h / std::log2(static_cast<double>(column.size()));
}

SpectralStats spectral_stats(std::span<const double> column) {
    if (column.empty()) throw DataError("spectral_stats: empty column");
    const auto n = static_cast<double>(column.size());
    double mean = 0.0;
    for (double v : column) mean += v;
    mean /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : column) {
        double d = v - mean;
        double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    SpectralStats stats;
    stats.std_dev = std::sqrt(m2);
    if (stats.std_dev < 1e-12) return stats; // degenerate column: skew = kurt = 0
    stats.skewness = m3 / (m2 * stats.std_dev);
    stats.kurtosis = m4 / (m2 * m2);
    return stats;
}

namespace {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

struct MelBank {
    // filter i covers bins [start[i], start[i] + weights[i].size())
    std::array<std::size_t, kMelFilters> start{};
    std::array<std::vector<double>, kMelFilters> weights;
};

MelBank build_mel_bank(std::size_t bins, double bin_hz) {
    MelBank bank;
    const double mel_hi = hz_to_mel(kMelHighHz);
    std::array<double, kMelFilters + 2> edges_hz;
    for (std::size_t k = 0; k < edges_hz.size(); ++k)
        edges_hz[k] = mel_to_hz(mel_hi * static_cast<double>(k) /
                                static_cast<double>(kMelFilters + 1));
    for (std::size_t i = 0; i < kMelFilters; ++i) {
        const double lo = edges_hz[i], mid = edges_hz[i + 1], hi = edges_hz[i + 2];
        auto first = static_cast<std::size_t>(std::ceil(lo / bin_hz));
        bank.start[i] = first;
        for (std::size_t b = first; b < bins; ++b) {
            double f = static_cast<double>(b) * bin_hz;
            if (f > hi) break;
            double w = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
            bank.weights[i].push_back(w < 0.0 ? 0.0 : w);
        }
    }
    return bank;
}

const MelBank& mel_bank_for(std::size_t bins, double bin_hz) {
    static std::mutex mutex;
    static std::map<std::pair<std::size_t, std::uint64_t>, std::unique_ptr<MelBank>> cache;
    std::uint64_t key_bits;
    std::memcpy(&key_bits, &bin_hz, sizeof key_bits);
    std::scoped_lock lock(mutex);
    auto& slot = cache[{bins, key_bits}];
    if (!slot) slot = std::make_unique<MelBank>(build_mel_bank(bins, bin_hz));
    return *slot;
}

// orthonormal DCT-II basis, kMfccCoeffs x kMelFilters
const std::array<double, kMfccCoeffs * kMelFilters>& dct_table() {
    static const auto table = [] {
        std::array<double, kMfccCoeffs * kMelFilters> t{};
        const auto n = static_cast<double>(kMelFilters);
        for (std::size_t k = 0; k < kMfccCoeffs; ++k) {
            double scale = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
            for (std::size_t m = 0; m < kMelFilters; ++m)
                t[k * kMelFilters + m] =
                    scale * std::cos(std::numbers::pi * static_cast<double>(k) *
                                     (2.0 * static_cast<double>(m) + 1.0) / (2.0 * n));
        }
        return t;
    }();
    return table;
}

} // namespace

std::vector<double> mfcc(std::span<const double> column, double bin_hz) {
    if (column.empty()) throw DataError("mfcc: empty column");
    if (!(bin_hz > 0.0)) throw DataError("mfcc: bin spacing must be positive");
    const MelBank& bank = mel_bank_for(column.size(), bin_hz);
    std::array<double, kMelFilters> log_energy;
    for (std::size_t i = 0; i < kMelFilters; ++i) {
        double e = 0.0;
        const auto& w = bank.weights[i];
        for (std::size_t k = 0; k < w.size(); ++k) {
            double mag = column[bank.start[i] + k];
            e += w[k] * mag * mag;
        }
        log_energy[i] = std::log(e < kLogFloor ? kLogFloor : e);
    }
    const auto& dct = dct_table();
    std::vector<double> out(kMfccCoeffs);
    for (std::size_t k = 0; k < kMfccCoeffs; ++k) {
        double acc = 0.0;
        for (std::size_t m = 0; m < kMelFilters; ++m)
            acc += dct[k * kMelFilters + m] * log_energy[m];
        out[k] = acc;
    }
    return out;
}

std::vector<double> chroma(std::span<const double> column, double bin_hz) {
    if (column.empty()) throw DataError("chroma: empty column");
    if (!(bin_hz > 0.0)) throw DataError("chroma: bin spacing must be positive");
    std::vector<double> out(12, 0.0);
    for (std::size_t b = 0; b < column.size(); ++b) {
        double f = static_cast<double>(b) * bin_hz;
        if (f < kChromaLowHz) continue;
        long pc = std::lround(12.0 * std::log2(f / 440.0));
        auto cls = static_cast<std::size_t>(((pc % 12) + 12) % 12);
        out[cls] += column[b] * column[b];
    }
    double total = 0.0;
    for (double v : out) total += v;
    if (total > 0.0)
        for (double& v : out) v /= total;
    return out;
}

std::array<double, KeyProfileTable::kKeyCount> key_strength(
    std::span<const double> chroma_vec, const KeyProfileTable& profiles) {
    constexpr std::size_t C = KeyProfileTable::kClasses;
    if (chroma_vec.size() != C) throw DataError("key_strength: chroma must be 12-dim");
    std::array<double, KeyProfileTable::kKeyCount> scores{};
    bool constant = true;
    for (std::size_t i = 1; i < C; ++i)
        if (chroma_vec[i] != chroma_vec[0]) { constant = false; break; }
    if (constant) return scores;

    for (std::size_t key = 0; key < KeyProfileTable::kKeyCount; ++key) {
        auto prof = profiles.profile(key);
        const std::size_t tonic = key % C;
        // template-anchored order: index m walks the profile from its tonic,
        // so rotated chroma at a rotated key accumulates the identical terms
        double sum_x = 0.0, sum_y = 0.0;
        for (std::size_t m = 0; m < C; ++m) {
            std::size_t pc = (tonic + m) % C;
            sum_x += chroma_vec[pc];
            sum_y += prof[pc];
        }
        const double mean_x = sum_x / static_cast<double>(C);
        const double mean_y = sum_y / static_cast<double>(C);
        double num = 0.0, den_x = 0.0, den_y = 0.0;
        for (std::size_t m = 0; m < C; ++m) {
            std::size_t pc = (tonic + m) % C;
            double dx = chroma_vec[pc] - mean_x;
            double dy = prof[pc] - mean_y;
            num += dx * dy;
            den_x += dx * dx;
            den_y += dy * dy;
        }
        double den = std::sqrt(den_x * den_y);
        double r = den > 0.0 ? num / den : 0.0;
        scores[key] = std::clamp(r, -1.0, 1.0);
    }
    return scores;
}

double amplitude_envelope(std::span<const double> frame) {
    if (frame.empty()) throw DataError("amplitude_envelope: empty frame");
    double s = 0.0;
    for (double x : frame) s += x * x;
    return std::sqrt(s / static_cast<double>(frame.size()));
}

std::vector<double> novelty_curve(const Mat& seq, std::size_t kernel_half) {
    const std::size_t T = seq.rows();
    if (T < 2) throw DataError("novelty_curve: need at least 2 frames");
    if (kernel_half == 0) throw DataError("novelty_curve: kernel_half must be positive");

    const auto kh = static_cast<std::ptrdiff_t>(kernel_half);
    const std::size_t side = 2 * kernel_half;
    const double sigma = static_cast<double>(kernel_half) / 2.0;

    std::vector<double> kernel(side * side);
    for (std::ptrdiff_t u = -kh; u < kh; ++u) {
        for (std::ptrdiff_t v = -kh; v < kh; ++v) {
            double su = u >= 0 ? 1.0 : -1.0;
            double sv = v >= 0 ? 1.0 : -1.0;
            double g = std::exp(-(static_cast<double>(u * u + v * v)) /
                                (2.0 * sigma * sigma));
            kernel[static_cast<std::size_t>(u + kh) * side +
                   static_cast<std::size_t>(v + kh)] = su * sv * g;
        }
    }

    // only the |i-j| < 2*kh band of the similarity matrix is ever read;
    // storing just the band keeps memory linear in the sequence length
    const std::ptrdiff_t half_band = 2 * kh - 1;
    const std::size_t band_w = static_cast<std::size_t>(2 * half_band + 1);
    std::vector<double> band(T * band_w, 0.0);
    const auto n = static_cast<std::ptrdiff_t>(T);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, i - half_band);
             j <= std::min(n - 1, i + half_band); ++j) {
            double sim = 1.0 - local_distance(seq.row(static_cast<std::size_t>(i)),
                                              seq.row(static_cast<std::size_t>(j)),
                                              Metric::cosine);
            band[static_cast<std::size_t>(i) * band_w +
                 static_cast<std::size_t>(j - i + half_band)] = sim;
        }
    }

    std::vector<double> out(T, 0.0);
    for (std::ptrdiff_t t = 0; t < n; ++t) {
        double acc = 0.0;
        for (std::ptrdiff_t u = -kh; u < kh; ++u) {
            std::ptrdiff_t i = t + u;
            if (i < 0 || i >= n) continue; // zero-padded edge
            for (std::ptrdiff_t v = -kh; v < kh; ++v) {
                std::ptrdiff_t j = t + v;
                if (j < 0 || j >= n) continue;
                acc += kernel[static_cast<std::size_t>(u + kh) * side +
                              static_cast<std::size_t>(v + kh)] *
                       band[static_cast<std::size_t>(i) * band_w +
                            static_cast<std::size_t>(j - i + half_band)];
            }
        }
        out[static_cast<std::size_t>(t)] = acc > 0.0 ? acc : 0.0;
    }
    return out;
}

double f_score(std::span<const double> values, std::span<const int> labels) {
    if (values.size() != labels.size()) throw DataError("f_score: size mismatch");
    if (values.empty()) throw DataError("f_score: empty input");
    double sum_pos = 0.0, sum_neg = 0.0, sum_all = 0.0;
    std::size_t n_pos = 0, n_neg = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (labels[i] == 1) {
            sum_pos += values[i];
            ++n_pos;
        } else if (labels[i] == -1) {
            sum_neg += values[i];
            ++n_neg;
        } else {
            throw DataError("f_score: labels must be +1 or -1");
        }
        sum_all += values[i];
    }
    if (n_pos == 0 || n_neg == 0) throw DataError("f_score: both classes required");
    const double mean_pos = sum_pos / static_cast<double>(n_pos);
    const double mean_neg = sum_neg / static_cast<double>(n_neg);
    const double mean_all = sum_all / static_cast<double>(values.size());
    double var_pos = 0.0, var_neg = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (labels[i] == 1) {
            double d = values[i] - mean_pos;
            var_pos += d * d;
        } else {
            double d = values[i] - mean_neg;
            var_neg += d * d;
        }
    }
    var_pos = n_pos > 1 ? var_pos / static_cast<double>(n_pos - 1) : 0.0;
    var_neg = n_neg > 1 ? var_neg / static_cast<double>(n_neg - 1) : 0.0;
    const double num = (mean_pos - mean_all) * (mean_pos - mean_all) +
                       (mean_neg - mean_all) * (mean_neg - mean_all);
    const double den = var_pos + var_neg;
    if (den == 0.0)
        return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
}

} // namespace soundalike
