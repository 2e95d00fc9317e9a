#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "soundalike/descriptors.hpp"
#include "soundalike/dtw.hpp"

namespace soundalike {

// Per-pair distance feature vector: one scalar per registered feature class,
// in registry order. The label is +1 for plagiarized pairs, -1 otherwise.
struct PairVector {
    std::string pair_id;
    std::vector<std::string> feature_names;
    std::vector<double> distances;
    std::optional<int> label;
};

// Output of F-score feature selection; kept and scores are indexed by
// feature position. At least one feature is always kept.
struct SelectionMask {
    std::vector<bool> kept;
    std::vector<double> scores;

    std::size_t kept_count() const;
};

// How one feature class is aligned: rhythm classes use the weighted,
// slope-constrained DTW variant; cosine serves the scale-free classes.
struct FeatureClassSpec {
    std::string name;
    Metric metric = Metric::euclidean;
    bool weighted = false;
};

// Registered classes in serialization order: timbral, mfcc, key, novelty,
// nmf. The pair vector length and column order follow this list.
const std::vector<FeatureClassSpec>& feature_class_registry();

struct AlignmentConfig {
    StepWeights weights;     // applied to the weighted classes only
    SlopeConstraint slope;   // likewise
    bool use_slope = true;
    bool normalize = true;   // divide by m + n so lengths stay comparable
    double sentinel_cap = 1e9;
};

// Aligns each registered class of the two bundles and collects the distances.
// Infeasible alignments enter as the sentinel cap so vectors stay total.
PairVector pair_distance_vector(const FeatureBundle& a, const FeatureBundle& b,
                                const AlignmentConfig& config);

// Ranks features by F-score over the labeled training pairs and keeps the
// top ceil(keep_fraction * n), ties resolved toward lower feature index.
SelectionMask select_features(const std::vector<PairVector>& training,
                              double keep_fraction = 0.75);

// Kept positions of v in original order.
std::vector<double> apply_mask(const std::vector<double>& v, const SelectionMask& mask);

// Delimited text table, header: pair_id, one column per feature name, label.
// Doubles are written in shortest round-trip form; an absent label is an
// empty field.
void save_pair_table(const std::filesystem::path& path,
                     const std::vector<PairVector>& pairs);
std::vector<PairVector> load_pair_table(const std::filesystem::path& path);

} // namespace soundalike
