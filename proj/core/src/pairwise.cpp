#include "soundalike/pairwise.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "soundalike/errors.hpp"

namespace soundalike {

std::size_t SelectionMask::kept_count() const {
    return static_cast<std::size_t>(std::count(kept.begin(), kept.end(), true));
}

const std::vector<FeatureClassSpec>& feature_class_registry() {
    static const std::vector<FeatureClassSpec> registry = {
        {"timbral", Metric::euclidean, false},
        {"mfcc", Metric::euclidean, false},
        {"key", Metric::cosine, false},
        {"novelty", Metric::euclidean, true},
        {"nmf", Metric::cosine, false},
    };
    return registry;
}

PairVector pair_distance_vector(const FeatureBundle& a, const FeatureBundle& b,
                                const AlignmentConfig& config) {
    PairVector out;
    for (const FeatureClassSpec& spec : feature_class_registry()) {
        auto ita = a.classes.find(spec.name);
        auto itb = b.classes.find(spec.name);
        if (ita == a.classes.end() || itb == b.classes.end())
            throw DataError("pair_distance_vector: missing feature class " + spec.name);
        const Mat& fa = ita->second;
        const Mat& fb = itb->second;
        AlignmentResult result;
        if (spec.weighted) {
            std::optional<SlopeConstraint> slope;
            if (config.use_slope) slope = config.slope;
            result = weighted_dtw(fa, fb, config.weights, slope, spec.metric);
        } else {
            result = dtw(fa, fb, spec.metric);
        }
        double value = config.normalize
                           ? normalize_distance(result, fa.rows(), fb.rows())
                           : result.distance;
        if (!std::isfinite(value) || value > config.sentinel_cap)
            value = config.sentinel_cap;
        out.feature_names.push_back(spec.name);
        out.distances.push_back(value);
    }
    return out;
}

SelectionMask select_features(const std::vector<PairVector>& training,
                              double keep_fraction) {
    if (training.empty()) throw DataError("select_features: empty training set");
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
        throw DataError("select_features: keep_fraction must be in (0, 1]");
    const std::size_t n = training.front().distances.size();
    if (n == 0) throw DataError("select_features: zero-length pair vectors");

    std::vector<int> labels;
    labels.reserve(training.size());
    for (const PairVector& p : training) {
        if (p.distances.size() != n)
            throw DataError("select_features: inconsistent vector lengths");
        if (!p.label) throw DataError("select_features: unlabeled pair " + p.pair_id);
        labels.push_back(*p.label);
    }

    SelectionMask mask;
    mask.scores.resize(n);
    std::vector<double> column(training.size());
    for (std::size_t f = 0; f < n; ++f) {
        for (std::size_t p = 0; p < training.size(); ++p)
            column[p] = training[p].distances[f];
        mask.scores[f] = f_score(column, labels);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return mask.scores[x] > mask.scores[y];
    });
    auto keep = static_cast<std::size_t>(
        std::ceil(keep_fraction * static_cast<double>(n)));
    keep = std::clamp<std::size_t>(keep, 1, n);
    mask.kept.assign(n, false);
    for (std::size_t i = 0; i < keep; ++i) mask.kept[order[i]] = true;
    return mask;
}

std::vector<double> apply_mask(const std::vector<double>& v, const SelectionMask& mask) {
    if (v.size() != mask.kept.size()) throw DataError("apply_mask: length mismatch");
    if (mask.kept_count() == 0) throw DataError("apply_mask: mask keeps no features");
    std::vector<double> out;
    out.reserve(mask.kept_count());
    for (std::size_t i = 0; i < v.size(); ++i)
        if (mask.kept[i]) out.push_back(v[i]);
    return out;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw DataError("failed to format number");
    return std::string(buf, ptr);
}

double parse_double(std::string_view text, const std::string& where) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw DataError("bad number '" + std::string(text) + "' in " + where);
    return v;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

void check_field(const std::string& value, const std::string& what) {
    if (value.find_first_of(",\n\r") != std::string::npos)
        throw DataError(what + " may not contain commas or newlines: " + value);
}

} // namespace

void save_pair_table(const std::filesystem::path& path,
                     const std::vector<PairVector>& pairs) {
    const std::vector<std::string>* names = nullptr;
    std::vector<std::string> registry_names;
    if (pairs.empty()) {
        for (const auto& spec : feature_class_registry())
            registry_names.push_back(spec.name);
        names = &registry_names;
    } else {
        names = &pairs.front().feature_names;
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write pair table: " + path.string());
    out << "pair_id";
    for (const std::string& name : *names) {
        check_field(name, "feature name");
        out << ',' << name;
    }
    out << ",label\n";
    for (const PairVector& p : pairs) {
        if (p.feature_names != *names)
            throw DataError("pair table: inconsistent feature names in " + p.pair_id);
        check_field(p.pair_id, "pair_id");
        out << p.pair_id;
        for (double d : p.distances) out << ',' << format_double(d);
        out << ',';
        if (p.label) out << (*p.label > 0 ? "+1" : "-1");
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

std::vector<PairVector> load_pair_table(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read pair table: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("pair table is empty: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_fields(line);
    if (header.size() < 3 || header.front() != "pair_id" || header.back() != "label")
        throw DataError("pair table header must be pair_id,<features...>,label");
    std::vector<std::string> names(header.begin() + 1, header.end() - 1);

    std::vector<PairVector> pairs;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != header.size())
            throw DataError("pair table row " + std::to_string(row) +
                            ": expected " + std::to_string(header.size()) + " fields");
        PairVector p;
        p.pair_id = fields.front();
        p.feature_names = names;
        for (std::size_t i = 1; i + 1 < fields.size(); ++i)
            p.distances.push_back(
                parse_double(fields[i], "pair table row " + std::to_string(row)));
        const std::string& label = fields.back();
        if (label == "+1") {
            p.label = 1;
        } else if (label == "-1") {
            p.label = -1;
        } else if (!label.empty()) {
            throw DataError("pair table row " + std::to_string(row) +
                            ": label must be +1, -1, or empty, got '" + label + "'");
        }
        pairs.push_back(std::move(p));
    }
    return pairs;
}

} // namespace soundalike
