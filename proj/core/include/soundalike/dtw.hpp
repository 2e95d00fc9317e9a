#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "soundalike/mat.hpp"

namespace soundalike {

enum class Metric { euclidean, cosine };

// Step costs for the weighted recurrence
//   D(i,j) = min( D(i-1,j-1) + w_sub * d(i,j),
//                 D(i,j-1)   + w_del * d(i,j),
//                 D(i-1,j)   + w_ins * d(i,j) ).
// Substitution is priced well above insertion/deletion so rhythm
// expansions stay cheap.
struct StepWeights {
    double substitution = 4.0;
    double insertion = 1.0;
    double deletion = 1.0;
};

// Local slope bound for the weighted recurrence. Feasibility means both
//   (a) lengths differ by at most a factor of max_slope, and
//   (b) no window-length run of consecutive steps moves along a single
//       axis more than ceil(window * max_slope / (max_slope + 1)) times,
//       i.e. single-axis runs are capped below the window length.
// With no feasible path the alignment distance is the +inf sentinel.
struct SlopeConstraint {
    std::size_t window = 5;
    double max_slope = 2.0;

    std::size_t max_axis_run() const;
};

struct AlignmentResult {
    double distance = 0.0;
    std::optional<std::vector<std::pair<std::size_t, std::size_t>>> path;
    bool normalized = false;
};

inline constexpr double kInfeasible = std::numeric_limits<double>::infinity();

// Euclidean norm of a-b, or 1 - cosine similarity. Zero vectors under
// cosine: distance 1 against a non-zero vector, 0 when both are zero.
double local_distance(std::span<const double> a, std::span<const double> b,
                      Metric metric);

// Classic alignment distance over two row-per-frame sequences. Distance-only
// computation keeps two DP rows over the shorter sequence; the path variant
// fills the full matrix.
AlignmentResult dtw(const Mat& a, const Mat& b, Metric metric = Metric::euclidean,
                    bool want_path = false);

// Weighted, optionally slope-constrained alignment. Passing std::nullopt
// disables the constraint, and with unit weights the result then matches
// dtw() exactly.
AlignmentResult weighted_dtw(const Mat& a, const Mat& b, const StepWeights& weights,
                             const std::optional<SlopeConstraint>& slope,
                             Metric metric = Metric::euclidean,
                             bool want_path = false);

// distance / (m + n); the +inf sentinel passes through.
double normalize_distance(const AlignmentResult& result, std::size_t m, std::size_t n);

} // namespace soundalike
