#include "soundalike/evaluation.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "soundalike/errors.hpp"

namespace soundalike {

EvalReport evaluate_scores(const std::vector<double>& scores,
                           const std::vector<int>& labels, double rho) {
    if (scores.empty()) throw DataError("evaluate: no scores");
    if (scores.size() != labels.size())
        throw DataError("evaluate: score/label count mismatch");

    EvalReport report;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        bool predicted = scores[i] - rho > 0.0;
        bool actual = labels[i] > 0;
        if (predicted && actual)
            ++report.confusion.true_positive;
        else if (predicted)
            ++report.confusion.false_positive;
        else if (actual)
            ++report.confusion.false_negative;
        else
            ++report.confusion.true_negative;
    }
    const auto& c = report.confusion;
    report.accuracy = static_cast<double>(c.true_positive + c.true_negative) /
                      static_cast<double>(c.total());
    auto rate = [](std::uint64_t num, std::uint64_t den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    report.precision = rate(c.true_positive, c.true_positive + c.false_positive);
    report.recall = rate(c.true_positive, c.true_positive + c.false_negative);

    const auto n_actual_pos = static_cast<double>(c.true_positive + c.false_negative);
    std::vector<double> thresholds = scores;
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                     thresholds.end());
    report.pr_curve.emplace_back(0.0, 1.0);
    for (double t : thresholds) {
        std::uint64_t tp = 0, fp = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= t) (labels[i] > 0 ? tp : fp) += 1;
        }
        double prec = rate(tp, tp + fp);
        double rec = n_actual_pos == 0.0 ? 0.0 : static_cast<double>(tp) / n_actual_pos;
        report.pr_curve.emplace_back(rec, prec);
    }
    for (std::size_t i = 0; i + 1 < report.pr_curve.size(); ++i) {
        const auto& [r0, p0] = report.pr_curve[i];
        const auto& [r1, p1] = report.pr_curve[i + 1];
        report.auc += (r1 - r0) * (p1 + p0) / 2.0;
    }
    return report;
}

EvalReport evaluate(const PlagiarismModel& model,
                    const std::vector<PairVector>& pairs) {
    if (pairs.empty()) throw DataError("evaluate: no pairs");
    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(pairs.size());
    for (const PairVector& p : pairs) {
        if (!p.label) throw DataError("evaluate: unlabeled pair " + p.pair_id);
        scores.push_back(score(model, p));
        labels.push_back(*p.label);
    }
    return evaluate_scores(scores, labels, model.rho);
}

void save_report(const std::filesystem::path& path, const EvalReport& report) {
    nlohmann::json j;
    j["accuracy"] = report.accuracy;
    j["precision"] = report.precision;
    j["recall"] = report.recall;
    j["auc"] = report.auc;
    j["confusion"] = {{"true_positive", report.confusion.true_positive},
                      {"false_positive", report.confusion.false_positive},
                      {"true_negative", report.confusion.true_negative},
                      {"false_negative", report.confusion.false_negative}};
    auto curve = nlohmann::json::array();
    for (const auto& [recall, precision] : report.pr_curve)
        curve.push_back({{"recall", recall}, {"precision", precision}});
    j["pr_curve"] = curve;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write report: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw DataError("write failed: " + path.string());
}

} // namespace soundalike
