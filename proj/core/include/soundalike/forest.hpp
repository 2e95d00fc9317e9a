#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "soundalike/pairwise.hpp"

namespace soundalike {

// Flattened tree node: feature < 0 marks a leaf carrying class counts,
// otherwise samples with value <= threshold descend left.
struct TreeNode {
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint32_t positives = 0;
    std::uint32_t total = 0;

    bool is_leaf() const { return feature < 0; }
};

// Node 0 is the root; child indices point into the same array.
struct DecisionTree {
    std::vector<TreeNode> nodes;
};

// Random forest over masked pair vectors plus the decision threshold rho.
// basis_ref records the content digest of the basis set that produced the
// nmf features, so predictions can refuse mismatched bases.
struct PlagiarismModel {
    std::vector<DecisionTree> trees;
    double rho = 0.5;
    SelectionMask mask;
    std::vector<std::string> feature_names;
    std::uint64_t seed = 0;
    std::string basis_ref;
};

struct ForestConfig {
    std::size_t tree_count = 150;
    std::uint64_t seed = 0;
    double keep_fraction = 0.75; // F-score retention, forwarded to select_features
};

// Grows tree_count trees on bootstrap samples. Each tree draws from a seed
// derived from the master seed and its index, samples ceil(sqrt(n)) candidate
// features per node, and splits by largest Gini decrease with ties resolved
// toward the lower feature index, then the lower threshold. Nodes stop at
// purity or below 2 samples. rho starts at 0.5.
PlagiarismModel train_forest(const std::vector<PairVector>& data,
                             const ForestConfig& config);

// Mean positive fraction of the leaves reached by v across all trees.
double score(const PlagiarismModel& model, const std::vector<double>& distances);
double score(const PlagiarismModel& model, const PairVector& v);

// +1 when score - rho is strictly positive, -1 otherwise.
int classify(const PlagiarismModel& model, const PairVector& v);

// Sweeps candidate thresholds (0, 1, and midpoints between consecutive
// distinct validation scores) and returns the smallest rho with the highest
// accuracy. Does not modify the model.
double calibrate_threshold(const PlagiarismModel& model,
                           const std::vector<PairVector>& validation);

// Versioned text container: config, feature names, mask, rho, basis_ref, and
// one flattened node table per tree. Round-trips are byte-exact.
void save_model(const std::filesystem::path& path, const PlagiarismModel& model);
PlagiarismModel load_model(const std::filesystem::path& path);

} // namespace soundalike
