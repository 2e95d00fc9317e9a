#include "soundalike/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "soundalike/audio.hpp"
#include "soundalike/errors.hpp"
#include "soundalike/rng.hpp"

namespace soundalike {

namespace {

// minor-pentatonic steps over two octaves; each song draws its own root so
// unrelated songs occupy distinct spectral registers
constexpr int kScaleSteps[] = {0, 3, 5, 7, 10, 12, 15, 17};
constexpr double kRootLowHz = 170.0;
constexpr double kRootHighHz = 320.0;
constexpr int kPartials = 4;
constexpr double kPartialAmp = 0.35;

struct Note {
    double hz;
    double seconds;
};

using SongSpec = std::vector<Note>;

SongSpec draw_song(Rng& rng, const SynthConfig& config) {
    SongSpec spec;
    spec.reserve(config.notes_per_song);
    double root = rng.real(kRootLowHz, kRootHighHz);
    for (std::size_t i = 0; i < config.notes_per_song; ++i) {
        int step = kScaleSteps[rng.index(std::size(kScaleSteps))];
        spec.push_back({root * std::pow(2.0, step / 12.0), config.note_seconds});
    }
    return spec;
}

std::vector<double> render(const SongSpec& spec) {
    std::vector<double> samples;
    for (const Note& note : spec) {
        auto n = static_cast<std::size_t>(std::llround(note.seconds * kTargetRate));
        for (std::size_t k = 0; k < n; ++k) {
            double t = static_cast<double>(k) / kTargetRate;
            // floored half-sine keeps the tone audible between peaks so added
            // noise never owns a frame; 5 ms edge ramps avoid clicks
            double edge = std::min({1.0, static_cast<double>(k) / 80.0,
                                    static_cast<double>(n - 1 - k) / 80.0});
            double env = edge * (0.25 + 0.75 * std::sin(std::numbers::pi *
                                                        static_cast<double>(k) /
                                                        static_cast<double>(n)));
            double x = 0.0;
            for (int h = 1; h <= kPartials; ++h)
                x += (kPartialAmp / h) *
                     std::sin(2.0 * std::numbers::pi * note.hz * h * t);
            samples.push_back(env * x);
        }
    }
    return samples;
}

std::vector<double> transformed_copy(const SongSpec& spec, Rng& rng,
                                     const SynthConfig& config) {
    SongSpec shifted = spec;
    if (config.stretch) {
        double factor = rng.real(0.8, 1.25);
        for (Note& note : shifted) note.seconds *= factor;
    }
    if (config.pitch) {
        double semitones = rng.real(-1.0, 1.0);
        double ratio = std::pow(2.0, semitones / 12.0);
        for (Note& note : shifted) note.hz *= ratio;
    }
    auto samples = render(shifted);
    if (config.noise && !samples.empty()) {
        double sum = 0.0;
        for (double x : samples) sum += x * x;
        double rms = std::sqrt(sum / static_cast<double>(samples.size()));
        // uniform noise has RMS a/sqrt(3); target is 20 dB under the signal
        double a = std::sqrt(3.0) * rms * 0.1;
        for (double& x : samples) x += rng.real(-a, a);
    }
    if (config.level) {
        double gain = rng.real(0.5, 1.1);
        for (double& x : samples) x *= gain;
    }
    return samples;
}

std::string pair_name(const char* prefix, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%04zu", prefix, i);
    return buf;
}

} // namespace

Manifest generate_synthetic_pairs(const std::filesystem::path& out_dir,
                                  const SynthConfig& config) {
    if (config.notes_per_song == 0 || !(config.note_seconds > 0.0))
        throw DataError("synth: song shape parameters must be positive");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw DataError("synth: cannot create " + out_dir.string());

    Rng rng(config.seed);
    Manifest relative; // file names only, as written into manifest.csv

    auto emit = [&](const std::string& id, int label,
                    const std::vector<double>& a, const std::vector<double>& b) {
        AudioTrack track;
        track.sample_rate = kTargetRate;
        ManifestEntry entry;
        entry.pair_id = id;
        entry.label = label;
        entry.path_a = id + "_a.wav";
        entry.path_b = id + "_b.wav";
        track.samples = a;
        write_wav((out_dir / entry.path_a).string(), track);
        track.samples = b;
        write_wav((out_dir / entry.path_b).string(), track);
        relative.entries.push_back(entry);
    };

    for (std::size_t i = 0; i < config.n_pos; ++i) {
        SongSpec spec = draw_song(rng, config);
        emit(pair_name("pos", i), 1, render(spec), transformed_copy(spec, rng, config));
    }
    for (std::size_t i = 0; i < config.n_neg; ++i) {
        SongSpec first = draw_song(rng, config);
        SongSpec second = draw_song(rng, config);
        emit(pair_name("neg", i), -1, render(first), render(second));
    }

    save_manifest(out_dir / "manifest.csv", relative);

    Manifest resolved = relative;
    for (ManifestEntry& entry : resolved.entries) {
        entry.path_a = out_dir / entry.path_a;
        entry.path_b = out_dir / entry.path_b;
    }
    return resolved;
}

} // namespace soundalike
