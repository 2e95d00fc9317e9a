#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "soundalike/forest.hpp"

namespace soundalike {

struct ConfusionCounts {
    std::uint64_t true_positive = 0;
    std::uint64_t false_positive = 0;
    std::uint64_t true_negative = 0;
    std::uint64_t false_negative = 0;

    std::uint64_t total() const {
        return true_positive + false_positive + true_negative + false_negative;
    }
};

// Point-estimate metrics at the model's rho plus the threshold-swept
// precision-recall curve. The curve starts at the (0, 1) anchor, then adds
// one point per distinct score in descending order, counting a pair as
// predicted positive when its score >= the threshold. A sweep step with no
// predicted positives reports precision 0. auc integrates precision over
// recall by the trapezoid rule.
struct EvalReport {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double auc = 0.0;
    ConfusionCounts confusion;
    std::vector<std::pair<double, double>> pr_curve; // (recall, precision)
};

// Metrics over raw scores with labels in {+1, -1}; the decision rule counts a
// pair as positive when score - rho is strictly positive.
EvalReport evaluate_scores(const std::vector<double>& scores,
                           const std::vector<int>& labels, double rho);

EvalReport evaluate(const PlagiarismModel& model,
                    const std::vector<PairVector>& pairs);

// JSON rendering of the report for the command-line tools.
void save_report(const std::filesystem::path& path, const EvalReport& report);

} // namespace soundalike
