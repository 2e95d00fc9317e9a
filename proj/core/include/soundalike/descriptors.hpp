#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "soundalike/mat.hpp"

namespace soundalike {

// Per-track feature container: class name -> sequence with one row per frame.
// All sequences share the source frame grid; the novelty curve is derived
// from the mfcc sequence but keeps the same length.
struct FeatureBundle {
    std::map<std::string, Mat> classes;
    std::vector<double> frame_times; // frame start times in seconds
};

// 24 pitch-class templates: indices 0..11 are major keys, 12..23 minor keys,
// tonic = index mod 12 in the pitch-class numbering where class 0 is A.
// Values are the Krumhansl-Schmuckler probe-tone ratings; every profile is a
// rotation of one of the two canonical templates.
class KeyProfileTable {
public:
    static constexpr std::size_t kKeyCount = 24;
    static constexpr std::size_t kClasses = 12;

    static const KeyProfileTable& instance();

    std::span<const double, kClasses> profile(std::size_t key) const;

private:
    KeyProfileTable();
    std::array<std::array<double, kClasses>, kKeyCount> profiles_;
};

// Fraction of sign changes between consecutive samples. A zero sample adopts
// the sign of the previous non-zero sample; leading zeros carry no sign.
double zero_crossing_rate(std::span<const double> frame);

// Smallest bin index whose cumulative squared magnitude reaches
// fraction * total. All-zero columns map to 0.
std::size_t spectral_rolloff(std::span<const double> column, double fraction = 0.85);

// Shannon entropy of the column normalized as a distribution, divided by
// log(column size) so the range is [0, 1]. All-zero columns map to 0.
double spectral_entropy(std::span<const double> column);

struct SpectralStats {
    double std_dev = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0; // fourth moment over squared variance, not excess
};

// Population moments of the magnitude values. Columns with standard
// deviation below 1e-12 report zero skewness and kurtosis.
SpectralStats spectral_stats(std::span<const double> column);

// 13 cepstral coefficients: 40 triangular mel filters over 0..8000 Hz applied
// to the squared magnitudes, natural log with floor 1e-10, orthonormal DCT-II.
std::vector<double> mfcc(std::span<const double> column, double bin_hz);

// 12-dim pitch-class energy profile, class 0 = A. Bins below 27.5 Hz are
// skipped; the result is L1-normalized and an all-zero profile stays zero.
std::vector<double> chroma(std::span<const double> column, double bin_hz);

// Pearson correlation of the chroma vector against each key profile. Terms
// accumulate in template order so rotating the chroma by k semitones rotates
// the per-family scores by exactly k. Constant chroma scores zero everywhere.
std::array<double, KeyProfileTable::kKeyCount> key_strength(
    std::span<const double> chroma_vec, const KeyProfileTable& profiles);

// Root-mean-square of the frame samples.
double amplitude_envelope(std::span<const double> frame);

// Checkerboard novelty along the diagonal of the cosine self-similarity
// matrix. The kernel is (2*kernel_half)^2 with Gaussian taper
// sigma = kernel_half / 2; the matrix is zero-padded at the edges and the
// output is clipped at 0. Length matches the input sequence.
std::vector<double> novelty_curve(const Mat& seq, std::size_t kernel_half = 32);

// Fisher-style separation score of one scalar feature across labeled pairs:
// ((mean+ - mean)^2 + (mean- - mean)^2) / (var+ + var-) with unbiased class
// variances; a single-sample class contributes zero variance. Zero over zero
// is 0; positive over zero is +inf so perfect separators rank first.
double f_score(std::span<const double> values, std::span<const int> labels);

} // namespace soundalike
