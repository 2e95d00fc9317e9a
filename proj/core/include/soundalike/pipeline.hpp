#pragma once

#include <filesystem>
#include <vector>

#include "soundalike/cache.hpp"
#include "soundalike/config.hpp"
#include "soundalike/nmf.hpp"

namespace soundalike {

// Runs the whole per-track chain: resample, frame, transform, descriptors,
// and, when a basis set is given, the exemplar-weight sequence as class
// "nmf". Without bases the bundle carries the four descriptor classes only.
FeatureBundle extract_features(const AudioTrack& track, const EngineConfig& config,
                               const BasisSet* bases);

// Compute-or-load wrapper: the cache entry is keyed by the audio file digest
// plus feature_config_digest. Passing a null cache always computes.
FeatureBundle cached_features(const std::filesystem::path& audio_path,
                              const EngineConfig& config, const BasisSet* bases,
                              const FeatureCache* cache);

// Spectrograms of every distinct track in the manifest, ordered by first
// appearance (a before b), feeding the exemplar draw. The basis seed is
// config.bases_seed and the pool size config.nmf.basis_count.
BasisSet build_bases_from_manifest(const Manifest& manifest,
                                   const EngineConfig& config);

// Labeled pair vector per manifest entry. Bundles are computed once per
// distinct track and reused across pairs.
std::vector<PairVector> pair_table_from_manifest(const Manifest& manifest,
                                                 const EngineConfig& config,
                                                 const BasisSet* bases,
                                                 const FeatureCache* cache);

} // namespace soundalike
