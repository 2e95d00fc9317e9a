#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace soundalike {

inline constexpr int kTargetRate = 16000;

// Mono amplitude sequence in [-1, 1].
struct AudioTrack {
    std::vector<double> samples;
    int sample_rate = kTargetRate;
    std::string source_path;
};

// Fixed-length windows cut from a track; frame t starts at t * hop.
struct FrameSet {
    std::vector<std::vector<double>> frames;
    std::size_t frame_len = 0;
    std::size_t hop = 0;
};

// Reads a RIFF/WAVE PCM file (8/16/24-bit int or 32-bit float, 1-2
// channels). Channels are averaged to mono, samples scaled to [-1, 1].
// Throws DataError for unreadable files, unsupported codecs, or
// zero-length audio.
AudioTrack decode(const std::string& path);

// Writes a mono track as 16-bit PCM WAV.
void write_wav(const std::string& path, const AudioTrack& track);

// Band-limited resample to 16 kHz (windowed-sinc, Kaiser window, stopband
// well past 60 dB). Source rates in [8000, 96000]. A track already at
// 16 kHz is returned unchanged, bit for bit.
AudioTrack resample(const AudioTrack& track);

// Cuts frames of frame_len samples every hop samples; the trailing
// remainder is discarded. Throws DataError when the track is shorter than
// one frame.
FrameSet frame(const AudioTrack& track, std::size_t frame_len = 640,
               std::size_t hop = 320);

} // namespace soundalike
