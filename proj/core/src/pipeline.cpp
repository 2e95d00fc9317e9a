#include "soundalike/pipeline.hpp"

#include <map>
#include <utility>

#include "soundalike/digest.hpp"
#include "soundalike/errors.hpp"

namespace soundalike {

FeatureBundle extract_features(const AudioTrack& track, const EngineConfig& config,
                               const BasisSet* bases) {
    AudioTrack at_rate = resample(track);
    FrameSet frames = frame(at_rate, config.ingest.frame_len, config.ingest.hop);
    Spectrogram spec = magnitude_spectrogram(frames, config.ingest);
    const std::size_t T = spec.frames.rows();

    FeatureBundle bundle;
    bundle.frame_times.reserve(T);
    for (std::size_t t = 0; t < T; ++t)
        bundle.frame_times.push_back(static_cast<double>(t * config.ingest.hop) /
                                     static_cast<double>(at_rate.sample_rate));

    Mat timbral(T, 7);
    Mat mfcc_seq(T, 13);
    Mat key_seq(T, KeyProfileTable::kKeyCount);
    const KeyProfileTable& profiles = KeyProfileTable::instance();
    for (std::size_t t = 0; t < T; ++t) {
        auto window = std::span<const double>(frames.frames[t]);
        auto column = spec.frames.row(t);
        SpectralStats stats = spectral_stats(column);
        timbral(t, 0) = zero_crossing_rate(window);
        timbral(t, 1) =
            static_cast<double>(spectral_rolloff(column, config.rolloff_fraction));
        timbral(t, 2) = spectral_entropy(column);
        timbral(t, 3) = stats.std_dev;
        timbral(t, 4) = stats.skewness;
        timbral(t, 5) = stats.kurtosis;
        timbral(t, 6) = amplitude_envelope(window);

        auto ceps = mfcc(column, spec.bin_hz);
        for (std::size_t k = 0; k < ceps.size(); ++k) mfcc_seq(t, k) = ceps[k];

        auto chroma_vec = chroma(column, spec.bin_hz);
        auto strengths = key_strength(chroma_vec, profiles);
        for (std::size_t k = 0; k < strengths.size(); ++k) key_seq(t, k) = strengths[k];
    }

    auto novelty = novelty_curve(mfcc_seq, config.novelty_kernel_half);
    Mat novelty_seq(T, 1);
    for (std::size_t t = 0; t < T; ++t) novelty_seq(t, 0) = novelty[t];

    bundle.classes.emplace("timbral", std::move(timbral));
    bundle.classes.emplace("mfcc", std::move(mfcc_seq));
    bundle.classes.emplace("key", std::move(key_seq));
    bundle.classes.emplace("novelty", std::move(novelty_seq));
    if (bases) {
        if (bases->dim() != config.ingest.spectrum_bins)
            throw DataError("basis set dimension does not match the spectrum layout");
        bundle.classes.emplace("nmf", nmf_feature_sequence(spec, *bases, config.nmf));
    }
    return bundle;
}

FeatureBundle cached_features(const std::filesystem::path& audio_path,
                              const EngineConfig& config, const BasisSet* bases,
                              const FeatureCache* cache) {
    if (!cache) return extract_features(decode(audio_path.string()), config, bases);
    const std::string audio_key = file_digest(audio_path.string());
    const std::string config_key =
        feature_config_digest(config, bases ? bases->content_digest() : "");
    if (auto hit = cache->try_load(audio_key, config_key)) return std::move(*hit);
    FeatureBundle bundle = extract_features(decode(audio_path.string()), config, bases);
    cache->store(audio_key, config_key, bundle);
    return bundle;
}

namespace {

std::vector<std::filesystem::path> distinct_tracks(const Manifest& manifest) {
    std::vector<std::filesystem::path> tracks;
    std::map<std::string, bool> seen;
    for (const ManifestEntry& entry : manifest.entries) {
        for (const auto& path : {entry.path_a, entry.path_b}) {
            if (!seen.emplace(path.string(), true).second) continue;
            tracks.push_back(path);
        }
    }
    return tracks;
}

} // namespace

BasisSet build_bases_from_manifest(const Manifest& manifest,
                                   const EngineConfig& config) {
    std::vector<Spectrogram> corpus;
    for (const auto& path : distinct_tracks(manifest)) {
        AudioTrack track = resample(decode(path.string()));
        FrameSet frames = frame(track, config.ingest.frame_len, config.ingest.hop);
        corpus.push_back(magnitude_spectrogram(frames, config.ingest));
    }
    return draw_exemplar_bases(corpus, config.nmf.basis_count, config.bases_seed);
}

std::vector<PairVector> pair_table_from_manifest(const Manifest& manifest,
                                                 const EngineConfig& config,
                                                 const BasisSet* bases,
                                                 const FeatureCache* cache) {
    std::map<std::string, FeatureBundle> bundles;
    auto bundle_for = [&](const std::filesystem::path& path) -> const FeatureBundle& {
        auto it = bundles.find(path.string());
        if (it == bundles.end())
            it = bundles.emplace(path.string(),
                                 cached_features(path, config, bases, cache))
                     .first;
        return it->second;
    };

    std::vector<PairVector> table;
    table.reserve(manifest.entries.size());
    for (const ManifestEntry& entry : manifest.entries) {
        PairVector pv = pair_distance_vector(bundle_for(entry.path_a),
                                             bundle_for(entry.path_b), config.align);
        pv.pair_id = entry.pair_id;
        pv.label = entry.label;
        table.push_back(std::move(pv));
    }
    return table;
}

} // namespace soundalike
