#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace soundalike {

struct ManifestEntry {
    std::string pair_id;
    std::filesystem::path path_a;
    std::filesystem::path path_b;
    int label = 0; // +1 plagiarized, -1 independent
    std::string genre; // optional tag, may be empty
};

struct Manifest {
    std::vector<ManifestEntry> entries;
};

// Delimited text with header pair_id,path_a,path_b,label[,genre]. Relative
// audio paths resolve against the manifest's directory. Duplicate ids and
// labels other than +1/-1 are rejected with the offending id or row named.
Manifest load_manifest(const std::filesystem::path& path);

void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

struct SplitConfig {
    double ratio = 0.9; // fraction of each class that lands in train
    std::uint64_t seed = 0;
    bool stratified = true;
};

struct SplitResult {
    Manifest train;
    Manifest test;
};

// Shuffles each class with the seed and sends the first ceil(ratio * n) of
// it to train, the rest to test. Unstratified mode shuffles the whole list.
SplitResult split(const Manifest& manifest, const SplitConfig& config);

} // namespace soundalike
