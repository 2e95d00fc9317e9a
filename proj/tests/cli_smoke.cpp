#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <json.hpp>

#include "soundalike/manifest.hpp"

using namespace soundalike;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output; // stdout and stderr interleaved
};

RunResult run_cli(const std::string& args) {
    std::string command = std::string(SOUNDALIKE_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    char buf[4096];
    while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe))
        result.output.append(buf, got);
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

fs::path scratch_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "soundalike-tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.good());
    out << text;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

std::size_t count_lines_with(const std::string& text, const std::string& needle) {
    std::size_t count = 0, at = 0;
    while ((at = text.find(needle, at)) != std::string::npos) {
        ++count;
        at += needle.size();
    }
    return count;
}

} // namespace

TEST_CASE("usage errors and data errors use distinct exit codes") {
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("synth --help").exit_code == 0);

    CHECK(run_cli("").exit_code == 1);               // a subcommand is required
    CHECK(run_cli("--no-such-flag").exit_code == 1);
    CHECK(run_cli("synth --out x").exit_code == 1);  // missing required options

    fs::path dir = scratch_dir("cli-errors");
    RunResult missing = run_cli("build-bases --manifest " +
                                (dir / "absent.csv").string() + " --out " +
                                (dir / "b.bin").string());
    CHECK(missing.exit_code == 2);
    CHECK(missing.output.find("error") != std::string::npos);

    write_file(dir / "corrupt.csv", "pair_id,path_a,path_b,label\np0,a.wav,b.wav,7\n");
    CHECK(run_cli("build-bases --manifest " + (dir / "corrupt.csv").string() +
                  " --out " + (dir / "b.bin").string())
              .exit_code == 2);
}

TEST_CASE("the full pipeline runs end to end") {
    fs::path dir = scratch_dir("cli-pipeline");
    // short notes keep the corpus cheap enough for a smoke run
    fs::path cfg = dir / "engine.cfg";
    write_file(cfg, "synth.notes = 4\nsynth.note_seconds = 0.1\n");
    std::string with_cfg = "--config " + cfg.string() + " ";

    fs::path corpus = dir / "corpus";
    RunResult synth = run_cli(with_cfg + "synth --out " + corpus.string() +
                              " --pos 3 --neg 3 --seed 5");
    REQUIRE(synth.exit_code == 0);
    Manifest manifest = load_manifest(corpus / "manifest.csv");
    REQUIRE(manifest.entries.size() == 6);

    fs::path bases = dir / "bases.bin";
    RunResult built = run_cli(with_cfg + "build-bases --manifest " +
                              (corpus / "manifest.csv").string() +
                              " --n 16 --seed 1 --out " + bases.string());
    REQUIRE(built.exit_code == 0);
    CHECK(built.output.find("16 bases") != std::string::npos);

    fs::path cache = dir / "cache";
    fs::path table = dir / "pairs.csv";
    std::string extract_args = with_cfg + "extract --manifest " +
                               (corpus / "manifest.csv").string() + " --cache " +
                               cache.string() + " --bases " + bases.string() +
                               " --out " + table.string();
    REQUIRE(run_cli(extract_args).exit_code == 0);
    std::string first_table = read_file(table);

    // the second pass is served from the cache and must agree byte for byte
    REQUIRE(run_cli(extract_args).exit_code == 0);
    CHECK(read_file(table) == first_table);

    fs::path model = dir / "model.bin";
    RunResult trained = run_cli(with_cfg + "train --pairs " + table.string() +
                                " --trees 12 --seed 2 --bases " + bases.string() +
                                " --out " + model.string());
    REQUIRE(trained.exit_code == 0);
    CHECK(trained.output.find("12 trees") != std::string::npos);

    RunResult predicted = run_cli(
        with_cfg + "predict --model " + model.string() + " --bases " +
        bases.string() + " --cache " + cache.string() + " --pair " +
        manifest.entries[0].path_a.string() + " " +
        manifest.entries[0].path_b.string());
    REQUIRE(predicted.exit_code == 0);
    CHECK((predicted.output.find("label +1") != std::string::npos ||
           predicted.output.find("label -1") != std::string::npos));
    CHECK(predicted.output.find("score ") != std::string::npos);
    for (const char* name : {"timbral ", "mfcc ", "key ", "novelty ", "nmf "})
        CHECK(count_lines_with(predicted.output, name) == 1);

    // the model remembers its basis pool and refuses to run without it
    CHECK(run_cli(with_cfg + "predict --model " + model.string() + " --pair " +
                  manifest.entries[0].path_a.string() + " " +
                  manifest.entries[0].path_b.string())
              .exit_code == 2);

    fs::path report = dir / "report.json";
    RunResult evaluated = run_cli(with_cfg + "evaluate --model " + model.string() +
                                  " --pairs " + table.string() + " --report " +
                                  report.string());
    REQUIRE(evaluated.exit_code == 0);
    CHECK(evaluated.output.find("accuracy ") != std::string::npos);

    auto json = nlohmann::json::parse(read_file(report));
    for (const char* key : {"accuracy", "precision", "recall", "auc"}) {
        REQUIRE(json.contains(key));
        double v = json[key].get<double>();
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    REQUIRE(json.contains("pr_curve"));
    CHECK(json["pr_curve"].is_array());
    CHECK(!json["pr_curve"].empty());
    REQUIRE(json.contains("confusion"));
    std::uint64_t total = 0;
    for (const char* cell :
         {"true_positive", "false_positive", "true_negative", "false_negative"})
        total += json["confusion"][cell].get<std::uint64_t>();
    CHECK(total == 6);
}

TEST_CASE("command-line options override the config file") {
    fs::path dir = scratch_dir("cli-precedence");
    fs::path cfg = dir / "engine.cfg";
    write_file(cfg, "forest.trees = 5\n");

    // a tiny hand-written table is enough to train on
    fs::path table = dir / "pairs.csv";
    std::string rows = "pair_id,a,b,label\n";
    for (int i = 0; i < 12; ++i) {
        bool pos = i % 2 == 0;
        rows += "p" + std::to_string(i) + "," + (pos ? "1.0" : "0.0") + "," +
                std::to_string(0.1 * i) + "," + (pos ? "+1" : "-1") + "\n";
    }
    write_file(table, rows);

    fs::path model = dir / "model.bin";
    REQUIRE(run_cli("--config " + cfg.string() + " train --pairs " + table.string() +
                    " --trees 7 --out " + model.string())
                .exit_code == 0);
    CHECK(read_file(model).find("\ntrees 7\n") != std::string::npos);

    fs::path defaulted = dir / "model5.bin";
    REQUIRE(run_cli("--config " + cfg.string() + " train --pairs " + table.string() +
                    " --out " + defaulted.string())
                .exit_code == 0);
    CHECK(read_file(defaulted).find("\ntrees 5\n") != std::string::npos);
}
