#pragma once

#include <filesystem>
#include <string>

#include "soundalike/forest.hpp"
#include "soundalike/manifest.hpp"
#include "soundalike/nmf.hpp"
#include "soundalike/pairwise.hpp"
#include "soundalike/spectrogram.hpp"
#include "soundalike/synth.hpp"

namespace soundalike {

// Every tunable of the engine with its default. A config file can override
// any of them through the dotted keys listed beside each field; the tools
// apply the file first, then explicit command-line flags.
struct EngineConfig {
    IngestConfig ingest;          // ingest.frame_len ingest.hop ingest.fft_size
                                  // ingest.spectrum_bins ingest.window
    NmfConfig nmf;                // nmf.basis_count nmf.max_iter nmf.rel_tol
                                  // nmf.normalize_weights
    std::uint64_t bases_seed = 0; // bases.seed
    AlignmentConfig align;        // align.w_sub align.w_ins align.w_del
                                  // align.window align.max_slope align.use_slope
                                  // align.normalize align.sentinel_cap
    ForestConfig forest;          // forest.trees forest.seed forest.keep_fraction
    SplitConfig split;            // split.ratio split.seed split.stratified
    SynthConfig synth;            // synth.seed synth.notes synth.note_seconds
                                  // synth.stretch synth.pitch synth.noise
                                  // synth.level
    double rolloff_fraction = 0.85;        // descriptors.rolloff_fraction
    std::size_t novelty_kernel_half = 32;  // descriptors.novelty_kernel_half
};

// Applies one dotted key. Unknown keys and unparsable values raise DataError.
void set_config_key(EngineConfig& config, const std::string& key,
                    const std::string& value);

// key=value lines, blank lines and #-comments ignored.
void apply_config_file(EngineConfig& config, const std::filesystem::path& path);

// All keys in a fixed order, suitable for digests and for --dump-config.
std::string serialize_config(const EngineConfig& config);

// Digest over the settings that shape a FeatureBundle (ingest, nmf,
// descriptor parameters) plus the basis content digest; the feature cache is
// keyed by this, so changing any of them is a cache miss.
std::string feature_config_digest(const EngineConfig& config,
                                  const std::string& basis_digest);

} // namespace soundalike
