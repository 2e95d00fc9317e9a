#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "soundalike/mat.hpp"
#include "soundalike/spectrogram.hpp"

namespace soundalike {

// Exemplar basis pool: N spectral frames drawn without replacement from a
// corpus of spectrograms. Row i is basis vector i. Immutable once built and
// shared by every track embedded against it.
struct BasisSet {
    Mat vectors; // N x dim
    std::uint64_t seed = 0;
    std::string source_digest;

    std::size_t count() const { return vectors.rows(); }
    std::size_t dim() const { return vectors.cols(); }

    // Content digest over shape, seed, source and values; models record it
    // so a prediction can verify it is paired with the right pool.
    std::string content_digest() const;
};

struct WeightMatrix {
    Mat values; // N x T, non-negative
    std::size_t iterations_run = 0;
    double final_divergence = 0.0;
};

struct NmfConfig {
    std::size_t basis_count = 64;
    std::size_t max_iter = 200;
    double rel_tol = 1e-5;
    bool normalize_weights = true; // L1 per frame in the feature sequence
};

inline constexpr double kNmfEpsilon = 1e-12;

// Digest of a spectrogram corpus, used as the basis pool's source id.
std::string corpus_digest(const std::vector<Spectrogram>& corpus);

// Samples `count` distinct non-degenerate frames uniformly from the pooled
// frames of all corpus spectrograms. All-zero frames are excluded before
// sampling. Deterministic in (corpus, seed).
BasisSet draw_exemplar_bases(const std::vector<Spectrogram>& corpus,
                             std::size_t count, std::uint64_t seed);

// Generalized KL divergence sum(M log(M/R) - M + R) with 0 log 0 = 0 and an
// epsilon guard inside the log. Summed row by row in ascending index order.
double generalized_kl(const Mat& m, const Mat& r);

// Multiplicative-update inference of non-negative activation weights:
// W starts at all-ones and is updated by
//   W <- W * (B^T (M / BW)) / (B^T 1)
// until the relative drop of the generalized KL divergence falls below
// rel_tol or max_iter is reached. Denominators carry a 1e-12 guard. If
// kl_trace is given it receives the divergence before iteration 1 and after
// every update.
WeightMatrix infer_weights(const Spectrogram& spectrogram, const BasisSet& bases,
                           std::size_t max_iter = 200, double rel_tol = 1e-5,
                           std::vector<double>* kl_trace = nullptr);

// Weight vectors as a per-frame feature sequence (row t = frame t). With
// normalize, each row is L1-normalized; zero rows pass through as zero.
Mat nmf_feature_sequence(const Spectrogram& spectrogram, const BasisSet& bases,
                         const NmfConfig& cfg = {});

// Versioned binary container for a basis pool; byte-exact round trip.
void save_basis_set(const std::string& path, const BasisSet& bases);
BasisSet load_basis_set(const std::string& path);

} // namespace soundalike
