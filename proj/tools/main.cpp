#include <charconv>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "soundalike/errors.hpp"
#include "soundalike/evaluation.hpp"
#include "soundalike/pipeline.hpp"

namespace {

using namespace soundalike;

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

// the model remembers which basis pool produced its nmf column; refuse to
// score features computed against a different pool
const BasisSet* require_bases_for_model(const PlagiarismModel& model,
                                        const std::string& bases_path,
                                        std::optional<BasisSet>& storage) {
    if (model.basis_ref.empty()) {
        if (!bases_path.empty())
            throw DataError("model carries no basis reference; drop --bases");
        return nullptr;
    }
    if (bases_path.empty())
        throw DataError("model was trained with basis set " + model.basis_ref +
                        "; pass --bases");
    storage = load_basis_set(bases_path);
    if (storage->content_digest() != model.basis_ref)
        throw DataError("basis set digest " + storage->content_digest() +
                        " does not match the model's " + model.basis_ref);
    return &*storage;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"decides whether one audio track is plausibly plagiarized from another"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "key=value configuration file");

    auto* extract = app.add_subcommand(
        "extract", "compute (and cache) feature bundles for every manifest track");
    std::string ex_manifest, ex_cache, ex_bases, ex_out;
    extract->add_option("--manifest", ex_manifest, "dataset manifest")->required();
    extract->add_option("--cache", ex_cache, "feature cache directory")->required();
    extract->add_option("--bases", ex_bases, "basis set file for the nmf class");
    extract->add_option("--out", ex_out, "also write the labeled pair-vector table here");

    auto* build = app.add_subcommand("build-bases",
                                     "draw exemplar bases from a manifest's tracks");
    std::string bb_manifest, bb_out;
    std::size_t bb_n = 0;
    std::uint64_t bb_seed = 0;
    build->add_option("--manifest", bb_manifest, "dataset manifest")->required();
    build->add_option("--n", bb_n, "number of bases");
    build->add_option("--seed", bb_seed, "sampling seed");
    build->add_option("--out", bb_out, "output basis file")->required();

    auto* train = app.add_subcommand("train", "train the forest on a pair-vector table");
    std::string tr_pairs, tr_out, tr_bases;
    std::size_t tr_trees = 0;
    std::uint64_t tr_seed = 0;
    train->add_option("--pairs", tr_pairs, "labeled pair-vector table")->required();
    train->add_option("--trees", tr_trees, "tree count");
    train->add_option("--seed", tr_seed, "forest seed");
    train->add_option("--bases", tr_bases, "basis set to stamp into the model");
    train->add_option("--out", tr_out, "output model file")->required();

    auto* predict = app.add_subcommand("predict", "score one pair of audio files");
    std::string pr_model, pr_bases, pr_cache;
    std::vector<std::string> pr_pair;
    predict->add_option("--model", pr_model, "model file")->required();
    predict->add_option("--pair", pr_pair, "two audio files")->expected(2)->required();
    predict->add_option("--bases", pr_bases, "basis set matching the model");
    predict->add_option("--cache", pr_cache, "optional feature cache directory");

    auto* evaluate_cmd = app.add_subcommand("evaluate",
                                            "metrics of a model over a labeled table");
    std::string ev_model, ev_pairs, ev_report;
    evaluate_cmd->add_option("--model", ev_model, "model file")->required();
    evaluate_cmd->add_option("--pairs", ev_pairs, "labeled pair-vector table")->required();
    evaluate_cmd->add_option("--report", ev_report, "JSON report path")->required();

    auto* synth = app.add_subcommand("synth", "generate a synthetic labeled corpus");
    std::string sy_out;
    std::size_t sy_pos = 0, sy_neg = 0;
    std::uint64_t sy_seed = 0;
    synth->add_option("--out", sy_out, "output directory")->required();
    synth->add_option("--pos", sy_pos, "positive pair count")->required();
    synth->add_option("--neg", sy_neg, "negative pair count")->required();
    synth->add_option("--seed", sy_seed, "generation seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    }

    try {
        EngineConfig config;
        if (!config_path.empty()) apply_config_file(config, config_path);

        if (*extract) {
            Manifest manifest = load_manifest(ex_manifest);
            FeatureCache cache(ex_cache);
            std::optional<BasisSet> bases;
            if (!ex_bases.empty()) bases = load_basis_set(ex_bases);
            const BasisSet* bases_ptr = bases ? &*bases : nullptr;
            if (!ex_out.empty()) {
                auto table = pair_table_from_manifest(manifest, config, bases_ptr, &cache);
                save_pair_table(ex_out, table);
                std::cout << "wrote " << table.size() << " pair vectors to " << ex_out
                          << '\n';
            } else {
                std::size_t tracks = 0;
                for (const ManifestEntry& entry : manifest.entries) {
                    for (const auto& path : {entry.path_a, entry.path_b}) {
                        cached_features(path, config, bases_ptr, &cache);
                        ++tracks;
                    }
                }
                std::cout << "cached features for " << tracks << " track references\n";
            }
        } else if (*build) {
            if (build->count("--n")) config.nmf.basis_count = bb_n;
            if (build->count("--seed")) config.bases_seed = bb_seed;
            Manifest manifest = load_manifest(bb_manifest);
            BasisSet bases = build_bases_from_manifest(manifest, config);
            save_basis_set(bb_out, bases);
            std::cout << "drew " << bases.count() << " bases of dim " << bases.dim()
                      << ", digest " << bases.content_digest() << '\n';
        } else if (*train) {
            if (train->count("--trees")) config.forest.tree_count = tr_trees;
            if (train->count("--seed")) config.forest.seed = tr_seed;
            auto pairs = load_pair_table(tr_pairs);
            PlagiarismModel model = train_forest(pairs, config.forest);
            if (!tr_bases.empty())
                model.basis_ref = load_basis_set(tr_bases).content_digest();
            save_model(tr_out, model);
            std::cout << "trained " << model.trees.size() << " trees on " << pairs.size()
                      << " pairs, kept " << model.mask.kept_count() << "/"
                      << model.mask.kept.size() << " features\n";
        } else if (*predict) {
            PlagiarismModel model = load_model(pr_model);
            std::optional<BasisSet> bases;
            const BasisSet* bases_ptr = require_bases_for_model(model, pr_bases, bases);
            std::optional<FeatureCache> cache;
            if (!pr_cache.empty()) cache.emplace(pr_cache);
            const FeatureCache* cache_ptr = cache ? &*cache : nullptr;
            FeatureBundle a = cached_features(pr_pair[0], config, bases_ptr, cache_ptr);
            FeatureBundle b = cached_features(pr_pair[1], config, bases_ptr, cache_ptr);
            PairVector pv = pair_distance_vector(a, b, config.align);
            double s = score(model, pv);
            std::cout << "label " << (s - model.rho > 0.0 ? "+1" : "-1") << '\n';
            std::cout << "score " << format_double(s) << '\n';
            for (std::size_t i = 0; i < pv.feature_names.size(); ++i)
                std::cout << pv.feature_names[i] << ' ' << format_double(pv.distances[i])
                          << '\n';
        } else if (*evaluate_cmd) {
            PlagiarismModel model = load_model(ev_model);
            auto pairs = load_pair_table(ev_pairs);
            EvalReport report = evaluate(model, pairs);
            save_report(ev_report, report);
            std::cout << "accuracy " << format_double(report.accuracy) << '\n'
                      << "precision " << format_double(report.precision) << '\n'
                      << "recall " << format_double(report.recall) << '\n'
                      << "auc " << format_double(report.auc) << '\n';
        } else if (*synth) {
            config.synth.n_pos = sy_pos;
            config.synth.n_neg = sy_neg;
            if (synth->count("--seed")) config.synth.seed = sy_seed;
            Manifest manifest = generate_synthetic_pairs(sy_out, config.synth);
            std::cout << "wrote " << manifest.entries.size() << " pairs to " << sy_out
                      << '\n';
        }
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
