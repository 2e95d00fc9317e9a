#include "soundalike/forest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "soundalike/errors.hpp"
#include "soundalike/rng.hpp"

namespace soundalike {

namespace {

struct TrainingSet {
    std::vector<std::vector<double>> rows; // masked vectors
    std::vector<int> labels;               // +1 / -1
};

struct Grower {
    const TrainingSet& set;
    std::size_t n_features;
    std::size_t n_candidates;
    Rng& rng;
    std::vector<TreeNode> nodes;

    std::int32_t grow(std::vector<std::size_t>& samples) {
        std::uint32_t pos = 0;
        for (std::size_t s : samples)
            if (set.labels[s] > 0) ++pos;
        const auto total = static_cast<std::uint32_t>(samples.size());

        auto make_leaf = [&]() {
            TreeNode leaf;
            leaf.positives = pos;
            leaf.total = total;
            nodes.push_back(leaf);
            return static_cast<std::int32_t>(nodes.size() - 1);
        };
        if (total < 2 || pos == 0 || pos == total) return make_leaf();

        auto candidates = rng.sample_without_replacement(n_features, n_candidates);
        std::sort(candidates.begin(), candidates.end());

        // best split = smallest weighted child Gini; candidates scan in
        // ascending feature then threshold order, so strict improvement
        // resolves ties toward the lower feature index and threshold
        double best_impurity = std::numeric_limits<double>::infinity();
        std::size_t best_feature = 0;
        double best_threshold = 0.0;
        bool found = false;

        std::vector<std::pair<double, int>> sorted(samples.size());
        for (std::size_t f : candidates) {
            for (std::size_t k = 0; k < samples.size(); ++k) {
                std::size_t s = samples[k];
                sorted[k] = {set.rows[s][f], set.labels[s]};
            }
            std::sort(sorted.begin(), sorted.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            double left_pos = 0.0, left_n = 0.0;
            const double all_pos = static_cast<double>(pos);
            const double all_n = static_cast<double>(total);
            for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
                if (sorted[k].second > 0) left_pos += 1.0;
                left_n += 1.0;
                if (sorted[k].first == sorted[k + 1].first) continue;
                const double right_n = all_n - left_n;
                const double right_pos = all_pos - left_pos;
                auto gini = [](double p, double n) {
                    double fp = p / n;
                    double fn = 1.0 - fp;
                    return 1.0 - fp * fp - fn * fn;
                };
                double weighted = (left_n * gini(left_pos, left_n) +
                                   right_n * gini(right_pos, right_n)) /
                                  all_n;
                if (weighted < best_impurity) {
                    best_impurity = weighted;
                    best_feature = f;
                    best_threshold = (sorted[k].first + sorted[k + 1].first) / 2.0;
                    found = true;
                }
            }
        }
        if (!found) return make_leaf(); // every candidate feature is constant here

        std::vector<std::size_t> left, right;
        for (std::size_t s : samples) {
            if (set.rows[s][best_feature] <= best_threshold)
                left.push_back(s);
            else
                right.push_back(s);
        }
        if (left.empty() || right.empty()) return make_leaf();

        TreeNode node;
        node.feature = static_cast<std::int32_t>(best_feature);
        node.threshold = best_threshold;
        nodes.push_back(node);
        auto index = static_cast<std::int32_t>(nodes.size() - 1);
        samples.clear();
        samples.shrink_to_fit();
        nodes[static_cast<std::size_t>(index)].left = grow(left);
        nodes[static_cast<std::size_t>(index)].right = grow(right);
        return index;
    }
};

double tree_fraction(const DecisionTree& tree, const std::vector<double>& masked) {
    std::size_t at = 0;
    for (;;) {
        const TreeNode& node = tree.nodes.at(at);
        if (node.is_leaf()) {
            if (node.total == 0) throw DataError("model tree has an empty leaf");
            return static_cast<double>(node.positives) / static_cast<double>(node.total);
        }
        auto f = static_cast<std::size_t>(node.feature);
        if (f >= masked.size()) throw DataError("model tree references a bad feature");
        at = static_cast<std::size_t>(masked[f] <= node.threshold ? node.left
                                                                  : node.right);
    }
}

} // namespace

PlagiarismModel train_forest(const std::vector<PairVector>& data,
                             const ForestConfig& config) {
    if (data.size() < 2) throw DataError("train_forest: need at least 2 examples");
    if (config.tree_count == 0) throw DataError("train_forest: tree_count must be >= 1");

    PlagiarismModel model;
    model.seed = config.seed;
    model.rho = 0.5;
    model.mask = select_features(data, config.keep_fraction); // also validates labels
    model.feature_names = data.front().feature_names;
    if (model.feature_names.empty())
        for (std::size_t i = 0; i < model.mask.kept.size(); ++i)
            model.feature_names.push_back("f" + std::to_string(i));
    if (model.feature_names.size() != model.mask.kept.size())
        throw DataError("train_forest: feature name count does not match vectors");

    TrainingSet set;
    set.rows.reserve(data.size());
    set.labels.reserve(data.size());
    bool has_pos = false, has_neg = false;
    for (const PairVector& p : data) {
        set.rows.push_back(apply_mask(p.distances, model.mask));
        set.labels.push_back(*p.label);
        (*p.label > 0 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) throw DataError("train_forest: both classes required");

    const std::size_t n = set.rows.size();
    const std::size_t n_features = model.mask.kept_count();
    const auto n_candidates = static_cast<std::size_t>(
        std::ceil(std::sqrt(static_cast<double>(n_features))));

    model.trees.reserve(config.tree_count);
    for (std::size_t t = 0; t < config.tree_count; ++t) {
        Rng rng(derive_seed(config.seed, t));
        std::vector<std::size_t> bootstrap(n);
        for (std::size_t i = 0; i < n; ++i) bootstrap[i] = rng.index(n);
        Grower grower{set, n_features, n_candidates, rng, {}};
        grower.grow(bootstrap);
        model.trees.push_back(DecisionTree{std::move(grower.nodes)});
    }
    return model;
}

double score(const PlagiarismModel& model, const std::vector<double>& distances) {
    if (distances.size() != model.mask.kept.size())
        throw DataError("score: vector length does not match the model mask");
    if (model.trees.empty()) throw DataError("score: model has no trees");
    auto masked = apply_mask(distances, model.mask);
    double sum = 0.0;
    for (const DecisionTree& tree : model.trees) sum += tree_fraction(tree, masked);
    return sum / static_cast<double>(model.trees.size());
}

double score(const PlagiarismModel& model, const PairVector& v) {
    return score(model, v.distances);
}

int classify(const PlagiarismModel& model, const PairVector& v) {
    return score(model, v) - model.rho > 0.0 ? 1 : -1;
}

double calibrate_threshold(const PlagiarismModel& model,
                           const std::vector<PairVector>& validation) {
    if (validation.empty()) throw DataError("calibrate_threshold: empty validation set");
    std::vector<double> scores;
    std::vector<int> labels;
    scores.reserve(validation.size());
    for (const PairVector& p : validation) {
        if (!p.label) throw DataError("calibrate_threshold: unlabeled pair " + p.pair_id);
        scores.push_back(score(model, p));
        labels.push_back(*p.label);
    }

    std::vector<double> distinct = scores;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<double> candidates = {0.0, 1.0};
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
        candidates.push_back((distinct[i] + distinct[i + 1]) / 2.0);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());

    double best_rho = 0.0;
    std::size_t best_correct = 0;
    bool first = true;
    for (double rho : candidates) { // ascending, so ties keep the smallest rho
        std::size_t correct = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            int predicted = scores[i] - rho > 0.0 ? 1 : -1;
            if (predicted == labels[i]) ++correct;
        }
        if (first || correct > best_correct) {
            best_correct = correct;
            best_rho = rho;
            first = false;
        }
    }
    return best_rho;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw DataError("failed to format number");
    return std::string(buf, ptr);
}

double parse_double(const std::string& text, const std::string& where) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw DataError("model file: bad number '" + text + "' in " + where);
    return v;
}

} // namespace

void save_model(const std::filesystem::path& path, const PlagiarismModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model: " + path.string());
    out << "soundalike-model 1\n";
    out << "seed " << model.seed << '\n';
    out << "rho " << format_double(model.rho) << '\n';
    out << "basis_ref " << (model.basis_ref.empty() ? "-" : model.basis_ref) << '\n';
    out << "features " << model.feature_names.size() << '\n';
    for (std::size_t i = 0; i < model.feature_names.size(); ++i) {
        out << "feature " << model.feature_names[i] << ' '
            << (model.mask.kept[i] ? 1 : 0) << ' ' << format_double(model.mask.scores[i])
            << '\n';
    }
    out << "trees " << model.trees.size() << '\n';
    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const auto& nodes = model.trees[t].nodes;
        out << "tree " << t << ' ' << nodes.size() << '\n';
        for (const TreeNode& node : nodes) {
            if (node.is_leaf())
                out << "leaf " << node.positives << ' ' << node.total << '\n';
            else
                out << "split " << node.feature << ' ' << format_double(node.threshold)
                    << ' ' << node.left << ' ' << node.right << '\n';
        }
    }
    out << "end\n";
    if (!out) throw DataError("write failed: " + path.string());
}

PlagiarismModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read model: " + path.string());
    auto next_line = [&](const char* what) {
        std::string line;
        if (!std::getline(in, line))
            throw DataError(std::string("model file truncated before ") + what);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return line;
    };
    auto expect_tag = [](std::istringstream& s, const char* tag) {
        std::string word;
        s >> word;
        if (word != tag)
            throw DataError(std::string("model file: expected '") + tag + "', got '" +
                            word + "'");
    };

    PlagiarismModel model;
    {
        std::istringstream s(next_line("header"));
        std::string magic;
        int version = 0;
        s >> magic >> version;
        if (magic != "soundalike-model")
            throw DataError("not a model file: " + path.string());
        if (version != 1)
            throw DataError("unsupported model version " + std::to_string(version));
    }
    {
        std::istringstream s(next_line("seed"));
        expect_tag(s, "seed");
        if (!(s >> model.seed)) throw DataError("model file: bad seed");
    }
    {
        std::istringstream s(next_line("rho"));
        expect_tag(s, "rho");
        std::string value;
        s >> value;
        model.rho = parse_double(value, "rho");
        if (!(model.rho >= 0.0 && model.rho <= 1.0))
            throw DataError("model file: rho out of [0, 1]");
    }
    {
        std::istringstream s(next_line("basis_ref"));
        expect_tag(s, "basis_ref");
        std::string value;
        s >> value;
        if (value.empty()) throw DataError("model file: missing basis_ref");
        model.basis_ref = value == "-" ? std::string() : value;
    }
    std::size_t n_features = 0;
    {
        std::istringstream s(next_line("features"));
        expect_tag(s, "features");
        if (!(s >> n_features) || n_features == 0)
            throw DataError("model file: bad feature count");
    }
    for (std::size_t i = 0; i < n_features; ++i) {
        std::istringstream s(next_line("feature row"));
        expect_tag(s, "feature");
        std::string name, score_text;
        int kept = 0;
        if (!(s >> name >> kept >> score_text) || (kept != 0 && kept != 1))
            throw DataError("model file: bad feature row");
        model.feature_names.push_back(name);
        model.mask.kept.push_back(kept == 1);
        model.mask.scores.push_back(parse_double(score_text, "feature score"));
    }
    if (model.mask.kept_count() == 0)
        throw DataError("model file: mask keeps no features");
    const std::size_t masked_dim = model.mask.kept_count();

    std::size_t n_trees = 0;
    {
        std::istringstream s(next_line("trees"));
        expect_tag(s, "trees");
        if (!(s >> n_trees) || n_trees == 0)
            throw DataError("model file: bad tree count");
    }
    for (std::size_t t = 0; t < n_trees; ++t) {
        std::istringstream s(next_line("tree header"));
        expect_tag(s, "tree");
        std::size_t index = 0, n_nodes = 0;
        if (!(s >> index >> n_nodes) || index != t || n_nodes == 0)
            throw DataError("model file: bad tree header");
        DecisionTree tree;
        for (std::size_t k = 0; k < n_nodes; ++k) {
            std::istringstream row(next_line("tree node"));
            std::string kind;
            row >> kind;
            TreeNode node;
            if (kind == "leaf") {
                if (!(row >> node.positives >> node.total) || node.total == 0 ||
                    node.positives > node.total)
                    throw DataError("model file: bad leaf node");
            } else if (kind == "split") {
                std::string threshold_text;
                if (!(row >> node.feature >> threshold_text >> node.left >> node.right))
                    throw DataError("model file: bad split node");
                node.threshold = parse_double(threshold_text, "split threshold");
                if (node.feature < 0 ||
                    static_cast<std::size_t>(node.feature) >= masked_dim)
                    throw DataError("model file: split feature out of range");
                auto bad_child = [&](std::int32_t c) {
                    return c <= 0 || static_cast<std::size_t>(c) >= n_nodes;
                };
                if (bad_child(node.left) || bad_child(node.right) ||
                    !std::isfinite(node.threshold))
                    throw DataError("model file: bad split node");
            } else {
                throw DataError("model file: unknown node kind '" + kind + "'");
            }
            tree.nodes.push_back(node);
        }
        model.trees.push_back(std::move(tree));
    }
    if (next_line("end") != "end") throw DataError("model file: missing end marker");
    return model;
}

} // namespace soundalike
