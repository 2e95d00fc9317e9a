#pragma once

#include <cstdint>
#include <filesystem>

#include "soundalike/manifest.hpp"

namespace soundalike {

// Controls for the offline stand-in corpus: short harmonic note sequences
// rendered at the engine rate. A positive pair is one song plus a transformed
// rendering; each transform toggle widens the gap the classifier must close.
// With every toggle off the transformed copy is bitwise identical.
struct SynthConfig {
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    std::uint64_t seed = 0;
    std::size_t notes_per_song = 8;
    double note_seconds = 0.275;
    bool stretch = true; // note durations scaled by one draw from 0.8..1.25
    bool pitch = true;   // all frequencies shifted up to +/-1 semitone
    bool noise = true;   // white noise 20 dB under the signal RMS
    bool level = true;   // gain drawn from 0.5..1.1
};

// Renders WAV files plus manifest.csv (relative paths) into out_dir and
// returns the manifest with paths resolved. Deterministic for a given config.
Manifest generate_synthetic_pairs(const std::filesystem::path& out_dir,
                                  const SynthConfig& config);

} // namespace soundalike
