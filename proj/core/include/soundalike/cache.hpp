#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "soundalike/descriptors.hpp"

namespace soundalike {

// Binary bundle container with a content digest trailer; any mismatch on
// read raises DataError so callers can fall back to recomputation.
void save_bundle(const std::filesystem::path& path, const FeatureBundle& bundle);
FeatureBundle load_bundle(const std::filesystem::path& path);

// Directory of bundles keyed by (audio digest, config digest). Writes go
// through a temp file and a rename so readers never see a partial entry.
class FeatureCache {
public:
    explicit FeatureCache(std::filesystem::path dir);

    std::filesystem::path entry_path(const std::string& audio_digest,
                                     const std::string& config_digest) const;

    // nullopt on a miss; a corrupt entry warns on stderr and reads as a miss
    std::optional<FeatureBundle> try_load(const std::string& audio_digest,
                                          const std::string& config_digest) const;

    void store(const std::string& audio_digest, const std::string& config_digest,
               const FeatureBundle& bundle) const;

private:
    std::filesystem::path dir_;
};

} // namespace soundalike
