#pragma once

#include <cstddef>
#include <string>

#include "soundalike/audio.hpp"
#include "soundalike/mat.hpp"

namespace soundalike {

enum class WindowKind { hann, rect };

// Framing and transform parameters. Basis sets and cached features bake in
// the frame_len 640 / 1024-bin layout, so changing those invalidates both;
// hop, window, and fft size stay configurable so alternates can be tested.
struct IngestConfig {
    std::size_t frame_len = 640;
    std::size_t hop = 320;
    std::size_t fft_size = 2048;
    std::size_t spectrum_bins = 1024;
    WindowKind window = WindowKind::hann;
};

WindowKind window_kind_from_name(const std::string& name);
std::string window_kind_name(WindowKind w);

// Per-track magnitude spectrogram. Row t is the spectrum of frame t, so a
// row is one 1024-dim column of the model matrix M.
struct Spectrogram {
    Mat frames;          // frame count x spectrum_bins
    double bin_hz = 0.0; // frequency resolution
};

// Windows each frame, zero-pads to fft_size, and keeps the magnitudes of
// bins [0, spectrum_bins), dropping the Nyquist bin.
Spectrogram magnitude_spectrogram(const FrameSet& frames,
                                  const IngestConfig& cfg = {});

} // namespace soundalike
