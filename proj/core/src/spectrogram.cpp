#include "soundalike/spectrogram.hpp"

#include <cmath>

#include "soundalike/errors.hpp"
#include "soundalike/fft.hpp"

namespace soundalike {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

WindowKind window_kind_from_name(const std::string& name) {
    if (name == "hann") return WindowKind::hann;
    if (name == "rect") return WindowKind::rect;
    throw DataError("unknown window: " + name);
}

std::string window_kind_name(WindowKind w) {
    return w == WindowKind::hann ? "hann" : "rect";
}

Spectrogram magnitude_spectrogram(const FrameSet& frames, const IngestConfig& cfg) {
    if (frames.frame_len != cfg.frame_len)
        throw DataError("frame length " + std::to_string(frames.frame_len) +
                        " does not match configured " + std::to_string(cfg.frame_len));

    std::vector<double> window(cfg.frame_len, 1.0);
    if (cfg.window == WindowKind::hann)
        for (std::size_t k = 0; k < cfg.frame_len; ++k)
            window[k] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(k) /
                                             static_cast<double>(cfg.frame_len));

    Fft fft(cfg.fft_size);
    Spectrogram spec;
    spec.bin_hz = static_cast<double>(kTargetRate) / static_cast<double>(cfg.fft_size);
    spec.frames = Mat(frames.frames.size(), cfg.spectrum_bins);

    std::vector<double> buf(cfg.frame_len);
    for (std::size_t t = 0; t < frames.frames.size(); ++t) {
        for (std::size_t k = 0; k < cfg.frame_len; ++k)
            buf[k] = frames.frames[t][k] * window[k];
        auto mags = fft.real_magnitudes(buf, cfg.spectrum_bins);
        auto row = spec.frames.row(t);
        for (std::size_t i = 0; i < cfg.spectrum_bins; ++i) row[i] = mags[i];
    }
    return spec;
}

} // namespace soundalike
