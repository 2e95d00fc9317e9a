#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "soundalike/cache.hpp"
#include "soundalike/descriptors.hpp"
#include "soundalike/errors.hpp"
#include "soundalike/evaluation.hpp"
#include "soundalike/forest.hpp"
#include "soundalike/manifest.hpp"
#include "soundalike/pairwise.hpp"
#include "soundalike/rng.hpp"
#include "soundalike/synth.hpp"

using namespace soundalike;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "soundalike-tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

Mat random_mat(Rng& rng, std::size_t rows, std::size_t cols) {
    Mat m(rows, cols);
    for (double& v : m.data()) v = rng.real(-1.0, 1.0);
    return m;
}

// bundle with every registered class present; per-class frame counts can be
// forced so individual alignments go infeasible
FeatureBundle make_bundle(Rng& rng, std::size_t frames,
                          std::size_t novelty_frames = 0) {
    if (novelty_frames == 0) novelty_frames = frames;
    FeatureBundle b;
    b.classes["timbral"] = random_mat(rng, frames, 7);
    b.classes["mfcc"] = random_mat(rng, frames, 13);
    b.classes["key"] = random_mat(rng, frames, 24);
    b.classes["novelty"] = random_mat(rng, novelty_frames, 1);
    b.classes["nmf"] = random_mat(rng, frames, 64);
    for (Mat* m : {&b.classes["key"], &b.classes["nmf"]})
        for (double& v : m->data()) v = std::abs(v) + 0.01;
    b.frame_times.resize(frames);
    for (std::size_t t = 0; t < frames; ++t)
        b.frame_times[t] = 0.02 * static_cast<double>(t);
    return b;
}

PairVector labeled_pair(const std::string& id, std::vector<double> distances,
                        int label) {
    PairVector p;
    p.pair_id = id;
    p.distances = std::move(distances);
    for (std::size_t i = 0; i < p.distances.size(); ++i)
        p.feature_names.push_back("f" + std::to_string(i));
    p.label = label;
    return p;
}

// margin on feature 0, noise everywhere else; trivially separable
std::vector<PairVector> separable_pairs(std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<PairVector> out;
    for (std::size_t i = 0; i < count; ++i) {
        int label = i % 2 == 0 ? 1 : -1;
        std::vector<double> d(4);
        d[0] = (label > 0 ? 1.0 : -1.0) + 0.1 * rng.real(-1.0, 1.0);
        for (std::size_t f = 1; f < d.size(); ++f) d[f] = rng.real(-1.0, 1.0);
        out.push_back(labeled_pair("p" + std::to_string(i), std::move(d), label));
    }
    return out;
}

// model whose every score is positives/total regardless of input
PlagiarismModel leaf_model(std::uint32_t positives, std::uint32_t total,
                           double rho) {
    PlagiarismModel model;
    model.rho = rho;
    model.mask.kept = {true};
    model.mask.scores = {0.0};
    model.feature_names = {"d"};
    TreeNode leaf;
    leaf.positives = positives;
    leaf.total = total;
    model.trees.push_back(DecisionTree{{leaf}});
    return model;
}

double walk_score(const PlagiarismModel& model, const std::vector<double>& v) {
    auto masked = apply_mask(v, model.mask);
    double sum = 0.0;
    for (const DecisionTree& tree : model.trees) {
        std::size_t at = 0;
        while (!tree.nodes[at].is_leaf()) {
            const TreeNode& n = tree.nodes[at];
            at = static_cast<std::size_t>(
                masked[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                           : n.right);
        }
        sum += static_cast<double>(tree.nodes[at].positives) /
               static_cast<double>(tree.nodes[at].total);
    }
    return sum / static_cast<double>(model.trees.size());
}

} // namespace

TEST_CASE("feature class registry order and alignment settings") {
    const auto& reg = feature_class_registry();
    REQUIRE(reg.size() == 5);
    CHECK(reg[0].name == "timbral");
    CHECK(reg[1].name == "mfcc");
    CHECK(reg[2].name == "key");
    CHECK(reg[3].name == "novelty");
    CHECK(reg[4].name == "nmf");
    CHECK(reg[0].metric == Metric::euclidean);
    CHECK(reg[1].metric == Metric::euclidean);
    CHECK(reg[2].metric == Metric::cosine);
    CHECK(reg[3].metric == Metric::euclidean);
    CHECK(reg[4].metric == Metric::cosine);
    for (std::size_t i = 0; i < reg.size(); ++i) CHECK(reg[i].weighted == (i == 3));
}

TEST_CASE("pair distance vector closed forms") {
    Rng rng(60);
    FeatureBundle a = make_bundle(rng, 8);
    AlignmentConfig config;

    PairVector self = pair_distance_vector(a, a, config);
    REQUIRE(self.distances.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(self.feature_names[i] == feature_class_registry()[i].name);
        if (feature_class_registry()[i].metric == Metric::euclidean) {
            CHECK(self.distances[i] == 0.0);
        } else {
            // cosine similarity of a vector with itself rounds to one ulp
            // shy of 1, so the distance sits just above zero
            CHECK(self.distances[i] >= 0.0);
            CHECK(self.distances[i] <= 1e-14);
        }
    }

    FeatureBundle missing = a;
    missing.classes.erase("key");
    CHECK_THROWS_AS(pair_distance_vector(a, missing, config), DataError);
}

TEST_CASE("pair distance vector matches standalone alignments") {
    Rng rng(61);
    FeatureBundle a = make_bundle(rng, 9);
    FeatureBundle b = make_bundle(rng, 7);
    AlignmentConfig config;
    PairVector v = pair_distance_vector(a, b, config);

    const auto& reg = feature_class_registry();
    for (std::size_t i = 0; i < reg.size(); ++i) {
        const Mat& fa = a.classes.at(reg[i].name);
        const Mat& fb = b.classes.at(reg[i].name);
        AlignmentResult res =
            reg[i].weighted
                ? weighted_dtw(fa, fb, config.weights, config.slope, reg[i].metric)
                : dtw(fa, fb, reg[i].metric);
        CHECK(v.distances[i] == normalize_distance(res, fa.rows(), fb.rows()));
    }

    PairVector swapped = pair_distance_vector(b, a, config);
    for (std::size_t i = 0; i < 5; ++i) CHECK(v.distances[i] == swapped.distances[i]);
}

TEST_CASE("infeasible alignment enters as the sentinel cap") {
    Rng rng(62);
    // novelty curves of 2 vs 5 frames exceed the 2x slope bound
    FeatureBundle a = make_bundle(rng, 6, 2);
    FeatureBundle b = make_bundle(rng, 6, 5);
    AlignmentConfig config;
    PairVector v = pair_distance_vector(a, b, config);
    CHECK(v.distances[3] == config.sentinel_cap);
    for (std::size_t i : {0u, 1u, 2u, 4u}) CHECK(v.distances[i] < config.sentinel_cap);

    config.use_slope = false;
    PairVector free = pair_distance_vector(a, b, config);
    CHECK(free.distances[3] < config.sentinel_cap);
}

TEST_CASE("feature selection ranks by class separation") {
    Rng rng(63);
    std::vector<PairVector> training;
    for (std::size_t i = 0; i < 40; ++i) {
        int label = i % 2 == 0 ? 1 : -1;
        std::vector<double> d(4);
        d[0] = rng.real(0.0, 1.0);                                  // noise
        d[1] = (label > 0 ? 3.0 : 0.0) + rng.real(0.0, 0.2);        // strong
        d[2] = (label > 0 ? 0.6 : 0.4) + rng.real(0.0, 0.3);        // weak
        d[3] = rng.real(0.0, 1.0);                                  // noise
        training.push_back(labeled_pair("t" + std::to_string(i), std::move(d), label));
    }

    SelectionMask all = select_features(training, 1.0);
    CHECK(all.kept_count() == 4);
    REQUIRE(all.scores.size() == 4);
    for (std::size_t f = 0; f < 4; ++f) {
        std::vector<double> column;
        std::vector<int> labels;
        for (const auto& p : training) {
            column.push_back(p.distances[f]);
            labels.push_back(*p.label);
        }
        CHECK(all.scores[f] == doctest::Approx(oracles::f_score_oracle(column, labels))
                                   .epsilon(1e-12));
    }

    SelectionMask half = select_features(training, 0.5);
    CHECK(half.kept_count() == 2);
    CHECK(half.kept[1]); // the strongly separated column always survives

    // a feature with zero negative-class variance scores infinite and wins
    std::vector<PairVector> with_inf = training;
    for (auto& p : with_inf) p.distances[3] = *p.label > 0 ? 1.0 : 0.0;
    SelectionMask top = select_features(with_inf, 0.25);
    CHECK(top.kept_count() == 1);
    CHECK(top.kept[3]);
}

TEST_CASE("feature selection is invariant to pair order and breaks ties low") {
    Rng rng(64);
    std::vector<PairVector> training;
    for (std::size_t i = 0; i < 30; ++i) {
        int label = i % 2 == 0 ? 1 : -1;
        std::vector<double> d(3);
        d[0] = rng.real(0.0, 1.0);
        d[1] = (label > 0 ? 1.0 : 0.0) + rng.real(0.0, 0.5);
        d[2] = d[1]; // exact duplicate column: tied score with index 1
        training.push_back(labeled_pair("t" + std::to_string(i), std::move(d), label));
    }

    SelectionMask mask = select_features(training, 0.34); // keeps ceil(1.02) = 2

    std::vector<PairVector> shuffled = training;
    Rng shuffler(65);
    shuffler.shuffle(shuffled);
    SelectionMask again = select_features(shuffled, 0.34);
    CHECK(mask.kept == again.kept);
    CHECK(mask.scores == again.scores);

    // keeping two slots admits both tied columns and drops the noise one
    SelectionMask pair_kept = select_features(training, 0.4);
    CHECK(pair_kept.kept_count() == 2);
    CHECK(pair_kept.kept[1]);
    CHECK(pair_kept.kept[2]);
    CHECK(!pair_kept.kept[0]);

    // with a single slot the tied columns compete and the lower index wins
    SelectionMask tied = select_features(training, 0.3);
    CHECK(tied.kept_count() == 1);
    CHECK(tied.kept[1]);
    CHECK(!tied.kept[2]);

    std::vector<PairVector> unlabeled = training;
    unlabeled[4].label.reset();
    CHECK_THROWS_AS(select_features(unlabeled, 0.5), DataError);
}

TEST_CASE("mask application keeps original order") {
    SelectionMask mask;
    mask.kept = {true, false, true, true};
    mask.scores = {1.0, 0.0, 2.0, 3.0};
    std::vector<double> v{10.0, 20.0, 30.0, 40.0};
    CHECK(apply_mask(v, mask) == std::vector<double>{10.0, 30.0, 40.0});

    SelectionMask full;
    full.kept = {true, true, true, true};
    full.scores = mask.scores;
    CHECK(apply_mask(v, full) == v);

    std::vector<double> short_vec{1.0, 2.0};
    CHECK_THROWS_AS(apply_mask(short_vec, mask), DataError);
}

TEST_CASE("pair table round-trips byte for byte") {
    fs::path dir = scratch_dir("pair-table");
    Rng rng(66);
    std::vector<PairVector> pairs;
    for (std::size_t i = 0; i < 12; ++i) {
        std::vector<double> d(5);
        for (double& x : d) x = rng.real(0.0, 3.0);
        PairVector p;
        p.pair_id = "pair" + std::to_string(i);
        for (const auto& spec : feature_class_registry())
            p.feature_names.push_back(spec.name);
        p.distances = d;
        if (i % 3 != 2) p.label = i % 2 == 0 ? 1 : -1; // leave some unlabeled
        pairs.push_back(std::move(p));
    }

    fs::path first = dir / "a.csv";
    save_pair_table(first, pairs);
    auto loaded = load_pair_table(first);
    REQUIRE(loaded.size() == pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        CHECK(loaded[i].pair_id == pairs[i].pair_id);
        CHECK(loaded[i].distances == pairs[i].distances);
        CHECK(loaded[i].label == pairs[i].label);
        CHECK(loaded[i].feature_names == pairs[i].feature_names);
    }
    fs::path second = dir / "b.csv";
    save_pair_table(second, loaded);
    CHECK(read_file(first) == read_file(second));
}

TEST_CASE("pair table rejects malformed input") {
    fs::path dir = scratch_dir("pair-table-bad");
    write_file(dir / "head.csv", "id,x,label\n");
    CHECK_THROWS_AS(load_pair_table(dir / "head.csv"), DataError);

    write_file(dir / "label.csv", "pair_id,x,label\np0,1.5,2\n");
    CHECK_THROWS_AS(load_pair_table(dir / "label.csv"), DataError);

    write_file(dir / "fields.csv", "pair_id,x,y,label\np0,1.5,+1\n");
    CHECK_THROWS_AS(load_pair_table(dir / "fields.csv"), DataError);

    write_file(dir / "number.csv", "pair_id,x,label\np0,abc,+1\n");
    CHECK_THROWS_AS(load_pair_table(dir / "number.csv"), DataError);

    CHECK_THROWS_AS(load_pair_table(dir / "absent.csv"), DataError);
}

TEST_CASE("forest training requires both classes") {
    auto pairs = separable_pairs(20, 70);
    for (auto& p : pairs) p.label = 1;
    ForestConfig config;
    config.tree_count = 5;
    CHECK_THROWS_AS(train_forest(pairs, config), DataError);

    std::vector<PairVector> tiny(pairs.begin(), pairs.begin() + 1);
    CHECK_THROWS_AS(train_forest(tiny, config), DataError);
}

TEST_CASE("forest training is deterministic for a fixed seed") {
    fs::path dir = scratch_dir("forest-determinism");
    auto pairs = separable_pairs(60, 71);
    ForestConfig config;
    config.tree_count = 20;
    config.seed = 9;

    PlagiarismModel one = train_forest(pairs, config);
    PlagiarismModel two = train_forest(pairs, config);
    save_model(dir / "one.bin", one);
    save_model(dir / "two.bin", two);
    CHECK(read_file(dir / "one.bin") == read_file(dir / "two.bin"));

    config.seed = 10;
    PlagiarismModel three = train_forest(pairs, config);
    save_model(dir / "three.bin", three);
    CHECK(read_file(dir / "one.bin") != read_file(dir / "three.bin"));
}

TEST_CASE("forest separates a margin dataset") {
    auto pairs = separable_pairs(200, 72);
    ForestConfig config;
    config.tree_count = 30;
    config.seed = 1;
    PlagiarismModel model = train_forest(pairs, config);
    CHECK(model.rho == 0.5);
    CHECK(model.seed == 1);

    std::size_t correct = 0;
    for (const auto& p : pairs)
        if (classify(model, p) == *p.label) ++correct;
    CHECK(static_cast<double>(correct) / static_cast<double>(pairs.size()) >= 0.99);
}

TEST_CASE("score averages leaf positive fractions") {
    PlagiarismModel model = leaf_model(3, 4, 0.5);
    CHECK(score(model, std::vector<double>{0.42}) == 0.75);

    auto pairs = separable_pairs(50, 73);
    ForestConfig config;
    config.tree_count = 15;
    PlagiarismModel trained = train_forest(pairs, config);
    Rng rng(74);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> v(4);
        for (double& x : v) x = rng.real(-2.0, 2.0);
        double s = score(trained, v);
        CHECK(s == walk_score(trained, v));
        CHECK(s >= 0.0);
        CHECK(s <= 1.0);
    }

    std::vector<double> wrong_len{1.0, 2.0};
    CHECK_THROWS_AS(score(trained, wrong_len), DataError);
}

TEST_CASE("classification needs a strictly positive margin over rho") {
    PairVector p = labeled_pair("q", {0.0}, 1);
    p.feature_names = {"d"};

    CHECK(classify(leaf_model(3, 4, 0.5), p) == 1);       // 0.75 vs 0.5
    CHECK(classify(leaf_model(3, 4, 0.75), p) == -1);     // score == rho
    CHECK(classify(leaf_model(4, 4, 1.0), p) == -1);      // rho 1 rejects everything
    CHECK(classify(leaf_model(0, 4, 0.0), p) == -1);      // score 0 == rho 0
    CHECK(classify(leaf_model(1, 4, 0.0), p) == 1);
}

TEST_CASE("threshold calibration closed forms") {
    PlagiarismModel model = leaf_model(3, 4, 0.5);
    auto with_score = [](const std::string& id, int label) {
        PairVector p;
        p.pair_id = id;
        p.feature_names = {"d"};
        p.distances = {0.0};
        p.label = label;
        return p;
    };

    // every validation pair scores 0.75; candidates collapse to {0, 1} and the
    // tie between them resolves to the smaller
    std::vector<PairVector> flat{with_score("a", 1), with_score("b", -1)};
    CHECK(calibrate_threshold(model, flat) == 0.0);

    std::vector<PairVector> all_pos{with_score("a", 1), with_score("b", 1)};
    CHECK(calibrate_threshold(model, all_pos) == 0.0);

    std::vector<PairVector> empty;
    CHECK_THROWS_AS(calibrate_threshold(model, empty), DataError);
}

TEST_CASE("threshold calibration separates score clusters at the midpoint") {
    // four single-leaf trees let one scalar control the score exactly: a
    // vector below t of them scores k/4 for k splits passed... simpler to
    // use a hand forest with one split each
    PlagiarismModel model;
    model.rho = 0.5;
    model.mask.kept = {true};
    model.mask.scores = {0.0};
    model.feature_names = {"d"};
    for (double threshold : {0.25, 0.45, 0.65, 0.85}) {
        TreeNode root;
        root.feature = 0;
        root.threshold = threshold;
        root.left = 1;
        root.right = 2;
        TreeNode lo;
        lo.positives = 0;
        lo.total = 1;
        TreeNode hi;
        hi.positives = 1;
        hi.total = 1;
        model.trees.push_back(DecisionTree{{root, lo, hi}});
    }

    auto with_value = [](const std::string& id, double value, int label) {
        PairVector p;
        p.pair_id = id;
        p.feature_names = {"d"};
        p.distances = {value};
        p.label = label;
        return p;
    };
    // values 0.3 and 0.4 score 0.25; values 0.7 and 0.9 score 0.75 and 1.0
    std::vector<PairVector> validation{
        with_value("n0", 0.3, -1), with_value("n1", 0.4, -1),
        with_value("p0", 0.7, 1), with_value("p1", 0.9, 1)};
    CHECK(calibrate_threshold(model, validation) == 0.5);

    std::vector<PairVector> missing = validation;
    missing[1].label.reset();
    CHECK_THROWS_AS(calibrate_threshold(model, missing), DataError);
}

TEST_CASE("calibration picks the smallest rho with the best oracle accuracy") {
    auto pairs = separable_pairs(40, 75);
    ForestConfig config;
    config.tree_count = 9;
    PlagiarismModel model = train_forest(pairs, config);

    auto validation = separable_pairs(30, 76);
    double rho = calibrate_threshold(model, validation);

    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& p : validation) {
        scores.push_back(score(model, p));
        labels.push_back(*p.label);
    }
    std::vector<double> distinct = scores;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    std::vector<double> candidates{0.0, 1.0};
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
        candidates.push_back((distinct[i] + distinct[i + 1]) / 2.0);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()),
                     candidates.end());

    auto accuracy_at = [&](double r) {
        auto c = oracles::confusion_oracle(scores, labels, r);
        return static_cast<double>(c.tp + c.tn) / static_cast<double>(scores.size());
    };
    double best = accuracy_at(rho);
    for (double r : candidates) {
        CHECK(accuracy_at(r) <= best + 1e-15);
        if (r < rho) CHECK(accuracy_at(r) < best);
    }
}

TEST_CASE("manifest loads rows and resolves relative paths") {
    fs::path dir = scratch_dir("manifest");
    fs::create_directories(dir / "audio");
    write_file(dir / "m.csv",
               "pair_id,path_a,path_b,label,genre\n"
               "p0,audio/a0.wav,audio/b0.wav,+1,folk\n"
               "p1,audio/a1.wav,audio/b1.wav,-1,\n"
               "p2,/abs/a2.wav,audio/b2.wav,+1,rock\n");
    Manifest m = load_manifest(dir / "m.csv");
    REQUIRE(m.entries.size() == 3);
    CHECK(m.entries[0].pair_id == "p0");
    CHECK(m.entries[0].label == 1);
    CHECK(m.entries[0].genre == "folk");
    CHECK(m.entries[0].path_a == dir / "audio/a0.wav");
    CHECK(m.entries[1].label == -1);
    CHECK(m.entries[1].genre.empty());
    CHECK(m.entries[2].path_a == fs::path("/abs/a2.wav")); // absolute stays put
}

TEST_CASE("manifest names the offender when rejecting input") {
    fs::path dir = scratch_dir("manifest-bad");
    write_file(dir / "dup.csv",
               "pair_id,path_a,path_b,label\n"
               "same,a.wav,b.wav,+1\n"
               "same,c.wav,d.wav,-1\n");
    bool threw = false;
    try {
        load_manifest(dir / "dup.csv");
    } catch (const DataError& e) {
        threw = true;
        CHECK(std::string(e.what()).find("same") != std::string::npos);
    }
    CHECK(threw);

    write_file(dir / "label.csv",
               "pair_id,path_a,path_b,label\n"
               "p0,a.wav,b.wav,2\n");
    threw = false;
    try {
        load_manifest(dir / "label.csv");
    } catch (const DataError& e) {
        threw = true;
        std::string what = e.what();
        CHECK((what.find("p0") != std::string::npos ||
               what.find('2') != std::string::npos));
    }
    CHECK(threw);
}

TEST_CASE("manifest round-trips through save and load") {
    fs::path dir = scratch_dir("manifest-roundtrip");
    Manifest m;
    m.entries.push_back({"p0", dir / "a.wav", dir / "b.wav", 1, "jazz"});
    m.entries.push_back({"p1", dir / "c.wav", dir / "d.wav", -1, ""});
    save_manifest(dir / "m.csv", m);
    Manifest back = load_manifest(dir / "m.csv");
    REQUIRE(back.entries.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back.entries[i].pair_id == m.entries[i].pair_id);
        CHECK(back.entries[i].label == m.entries[i].label);
        CHECK(back.entries[i].genre == m.entries[i].genre);
    }
}

namespace {

Manifest synthetic_manifest(std::size_t n_pos, std::size_t n_neg) {
    Manifest m;
    for (std::size_t i = 0; i < n_pos + n_neg; ++i) {
        ManifestEntry e;
        e.pair_id = "p" + std::to_string(i);
        e.path_a = "a" + std::to_string(i) + ".wav";
        e.path_b = "b" + std::to_string(i) + ".wav";
        e.label = i < n_pos ? 1 : -1;
        m.entries.push_back(std::move(e));
    }
    return m;
}

} // namespace

TEST_CASE("split sends ceil of the ratio to train") {
    SplitConfig config;
    config.seed = 3;

    config.stratified = false;
    SplitResult plain = split(synthetic_manifest(5, 5), config);
    CHECK(plain.train.entries.size() == 9);
    CHECK(plain.test.entries.size() == 1);

    config.stratified = true;
    SplitResult strat = split(synthetic_manifest(10, 10), config);
    CHECK(strat.train.entries.size() == 18);
    CHECK(strat.test.entries.size() == 2);
    auto count_pos = [](const Manifest& m) {
        return std::count_if(m.entries.begin(), m.entries.end(),
                             [](const ManifestEntry& e) { return e.label > 0; });
    };
    CHECK(count_pos(strat.train) == 9);
    CHECK(count_pos(strat.test) == 1);
}

TEST_CASE("split partitions the manifest deterministically") {
    Manifest m = synthetic_manifest(13, 11);
    SplitConfig config;
    config.seed = 8;
    SplitResult one = split(m, config);
    SplitResult two = split(m, config);

    auto ids = [](const Manifest& part) {
        std::set<std::string> s;
        for (const auto& e : part.entries) s.insert(e.pair_id);
        return s;
    };
    CHECK(ids(one.train) == ids(two.train));
    CHECK(ids(one.test) == ids(two.test));

    std::set<std::string> all = ids(one.train);
    for (const auto& id : ids(one.test)) {
        CHECK(all.find(id) == all.end()); // disjoint
        all.insert(id);
    }
    CHECK(all.size() == m.entries.size());

    config.seed = 9;
    SplitResult other = split(m, config);
    CHECK(ids(other.train) != ids(one.train)); // the seed actually matters
}

TEST_CASE("score evaluation closed forms") {
    EvalReport perfect =
        evaluate_scores({0.9, 0.8, 0.1, 0.2}, {1, 1, -1, -1}, 0.5);
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.confusion.true_positive == 2);
    CHECK(perfect.confusion.true_negative == 2);

    // one of each confusion cell
    EvalReport mixed = evaluate_scores({0.9, 0.4, 0.6, 0.1}, {1, 1, -1, -1}, 0.5);
    CHECK(mixed.accuracy == 0.5);
    CHECK(mixed.precision == 0.5);
    CHECK(mixed.recall == 0.5);
    CHECK(mixed.confusion.true_positive == 1);
    CHECK(mixed.confusion.false_negative == 1);
    CHECK(mixed.confusion.false_positive == 1);
    CHECK(mixed.confusion.true_negative == 1);

    EvalReport none = evaluate_scores({0.2, 0.3}, {1, -1}, 0.9);
    CHECK(none.precision == 0.0); // no predicted positives
    CHECK(none.recall == 0.0);

    REQUIRE(!mixed.pr_curve.empty());
    CHECK(mixed.pr_curve.front().first == 0.0);
    CHECK(mixed.pr_curve.front().second == 1.0);

    CHECK_THROWS_AS(evaluate_scores({}, {}, 0.5), DataError);
    CHECK_THROWS_AS(evaluate_scores({0.5}, {1, -1}, 0.5), DataError);
}

TEST_CASE("score evaluation matches the brute-force oracles") {
    Rng rng(77);
    for (int trial = 0; trial < 25; ++trial) {
        std::size_t n = 5 + rng.index(40);
        std::vector<double> scores(n);
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            scores[i] = rng.real01();
            if (trial % 2 == 1) scores[i] = std::round(scores[i] * 8.0) / 8.0;
            labels[i] = rng.index(2) == 0 ? 1 : -1;
        }
        if (std::none_of(labels.begin(), labels.end(), [](int l) { return l > 0; }))
            labels[0] = 1;
        double rho = rng.real01();

        EvalReport rep = evaluate_scores(scores, labels, rho);
        auto conf = oracles::confusion_oracle(scores, labels, rho);
        CHECK(rep.confusion.true_positive == conf.tp);
        CHECK(rep.confusion.false_positive == conf.fp);
        CHECK(rep.confusion.true_negative == conf.tn);
        CHECK(rep.confusion.false_negative == conf.fn);
        CHECK(rep.confusion.total() == n);
        auto ratio = [](std::size_t num, std::size_t den) {
            return den == 0 ? 0.0
                            : static_cast<double>(num) / static_cast<double>(den);
        };
        CHECK(rep.accuracy ==
              doctest::Approx(ratio(conf.tp + conf.tn, n)).epsilon(1e-12));
        CHECK(rep.precision ==
              doctest::Approx(ratio(conf.tp, conf.tp + conf.fp)).epsilon(1e-12));
        CHECK(rep.recall ==
              doctest::Approx(ratio(conf.tp, conf.tp + conf.fn)).epsilon(1e-12));

        auto curve = oracles::pr_oracle(scores, labels);
        CHECK(rep.auc == doctest::Approx(curve.auc).epsilon(1e-12));
        REQUIRE(rep.pr_curve.size() == curve.curve.size());
        for (std::size_t i = 0; i < curve.curve.size(); ++i) {
            CHECK(rep.pr_curve[i].first ==
                  doctest::Approx(curve.curve[i].first).epsilon(1e-12));
            CHECK(rep.pr_curve[i].second ==
                  doctest::Approx(curve.curve[i].second).epsilon(1e-12));
        }
    }
}

TEST_CASE("model evaluation scores each pair and delegates") {
    auto pairs = separable_pairs(40, 78);
    ForestConfig config;
    config.tree_count = 11;
    PlagiarismModel model = train_forest(pairs, config);

    auto held_out = separable_pairs(20, 79);
    EvalReport rep = evaluate(model, held_out);

    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& p : held_out) {
        scores.push_back(score(model, p));
        labels.push_back(*p.label);
    }
    EvalReport direct = evaluate_scores(scores, labels, model.rho);
    CHECK(rep.accuracy == direct.accuracy);
    CHECK(rep.auc == direct.auc);
    CHECK(rep.confusion.true_positive == direct.confusion.true_positive);
    CHECK(rep.pr_curve == direct.pr_curve);

    auto unlabeled = held_out;
    unlabeled[3].label.reset();
    CHECK_THROWS_AS(evaluate(model, unlabeled), DataError);
}

TEST_CASE("synthetic corpus generation is deterministic") {
    fs::path dir_a = scratch_dir("synth-a");
    fs::path dir_b = scratch_dir("synth-b");
    SynthConfig config;
    config.n_pos = 2;
    config.n_neg = 1;
    config.seed = 5;
    config.notes_per_song = 3;
    config.note_seconds = 0.1;

    Manifest one = generate_synthetic_pairs(dir_a, config);
    Manifest two = generate_synthetic_pairs(dir_b, config);
    REQUIRE(one.entries.size() == 3);
    REQUIRE(two.entries.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(one.entries[i].label == (i < 2 ? 1 : -1));
        CHECK(read_file(one.entries[i].path_a) == read_file(two.entries[i].path_a));
        CHECK(read_file(one.entries[i].path_b) == read_file(two.entries[i].path_b));
    }
    // the rendered manifest reloads against its own directory
    Manifest reloaded = load_manifest(dir_a / "manifest.csv");
    CHECK(reloaded.entries.size() == 3);
}

TEST_CASE("identity transform renders bitwise equal pair members") {
    fs::path dir = scratch_dir("synth-identity");
    SynthConfig config;
    config.n_pos = 1;
    config.n_neg = 0;
    config.seed = 11;
    config.notes_per_song = 3;
    config.note_seconds = 0.1;
    config.stretch = false;
    config.pitch = false;
    config.noise = false;
    config.level = false;

    Manifest m = generate_synthetic_pairs(dir, config);
    REQUIRE(m.entries.size() == 1);
    CHECK(read_file(m.entries[0].path_a) == read_file(m.entries[0].path_b));

    SynthConfig empty;
    Manifest none = generate_synthetic_pairs(scratch_dir("synth-empty"), empty);
    CHECK(none.entries.empty());
}

TEST_CASE("feature bundles survive the cache container") {
    fs::path dir = scratch_dir("bundle");
    Rng rng(80);
    FeatureBundle bundle = make_bundle(rng, 6);

    fs::path path = dir / "b.bin";
    save_bundle(path, bundle);
    FeatureBundle back = load_bundle(path);
    REQUIRE(back.classes.size() == bundle.classes.size());
    for (const auto& [name, mat] : bundle.classes) {
        auto it = back.classes.find(name);
        REQUIRE(it != back.classes.end());
        CHECK(it->second.rows() == mat.rows());
        CHECK(it->second.cols() == mat.cols());
        CHECK(it->second.data() == mat.data()); // exact doubles
    }
    CHECK(back.frame_times == bundle.frame_times);

    // chopping the trailer off must fail the digest check
    std::string bytes = read_file(path);
    write_file(dir / "cut.bin", bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(load_bundle(dir / "cut.bin"), DataError);
}

TEST_CASE("feature cache stores and retrieves by digest pair") {
    fs::path dir = scratch_dir("cache");
    FeatureCache cache(dir / "entries");
    Rng rng(81);
    FeatureBundle bundle = make_bundle(rng, 5);

    CHECK(!cache.try_load("audio0", "cfg0").has_value());
    cache.store("audio0", "cfg0", bundle);
    auto hit = cache.try_load("audio0", "cfg0");
    REQUIRE(hit.has_value());
    CHECK(hit->classes.at("mfcc").data() == bundle.classes.at("mfcc").data());
    CHECK(!cache.try_load("audio0", "cfg1").has_value()); // config digest misses
    CHECK(!cache.try_load("audio1", "cfg0").has_value());

    // a corrupt entry reads as a miss instead of an error
    fs::path entry = cache.entry_path("audio0", "cfg0");
    std::string bytes = read_file(entry);
    write_file(entry, bytes.substr(0, bytes.size() / 3));
    CHECK(!cache.try_load("audio0", "cfg0").has_value());
}
