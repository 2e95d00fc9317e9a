#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "soundalike/audio.hpp"
#include "soundalike/descriptors.hpp"
#include "soundalike/dtw.hpp"
#include "soundalike/forest.hpp"
#include "soundalike/nmf.hpp"
#include "soundalike/rng.hpp"
#include "soundalike/spectrogram.hpp"

using namespace soundalike;

namespace {

Mat random_mat(Rng& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
    Mat m(rows, cols);
    for (double& v : m.data()) v = rng.real(lo, hi);
    return m;
}

AudioTrack tone_track(double seconds) {
    AudioTrack track;
    track.sample_rate = kTargetRate;
    auto n = static_cast<std::size_t>(seconds * kTargetRate);
    track.samples.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        double t = static_cast<double>(k) / kTargetRate;
        track.samples[k] = 0.4 * std::sin(2.0 * std::numbers::pi * 440.0 * t) +
                           0.2 * std::sin(2.0 * std::numbers::pi * 660.0 * t);
    }
    return track;
}

void BM_Spectrogram(benchmark::State& state) {
    AudioTrack track = tone_track(2.0);
    IngestConfig cfg;
    for (auto _ : state) {
        FrameSet frames = frame(track, cfg.frame_len, cfg.hop);
        Spectrogram spec = magnitude_spectrogram(frames, cfg);
        benchmark::DoNotOptimize(spec.frames.data().data());
    }
}
BENCHMARK(BM_Spectrogram)->Unit(benchmark::kMillisecond);

void BM_NmfInfer(benchmark::State& state) {
    Rng rng(1);
    Spectrogram spec;
    spec.frames = random_mat(rng, 50, 128, 0.01, 1.0);
    spec.bin_hz = 7.8125;
    BasisSet bases;
    bases.vectors = random_mat(rng, 64, 128, 0.05, 1.0);
    for (auto _ : state) {
        WeightMatrix w = infer_weights(spec, bases, 50, 1e-5);
        benchmark::DoNotOptimize(w.values.data().data());
    }
}
BENCHMARK(BM_NmfInfer)->Unit(benchmark::kMillisecond);

void BM_ClassicDtw(benchmark::State& state) {
    Rng rng(2);
    Mat a = random_mat(rng, 200, 13, -1.0, 1.0);
    Mat b = random_mat(rng, 180, 13, -1.0, 1.0);
    for (auto _ : state) {
        AlignmentResult res = dtw(a, b, Metric::euclidean);
        benchmark::DoNotOptimize(res.distance);
    }
}
BENCHMARK(BM_ClassicDtw)->Unit(benchmark::kMillisecond);

void BM_WeightedDtwConstrained(benchmark::State& state) {
    Rng rng(3);
    Mat a = random_mat(rng, 200, 1, 0.0, 1.0);
    Mat b = random_mat(rng, 160, 1, 0.0, 1.0);
    StepWeights weights;
    SlopeConstraint slope;
    for (auto _ : state) {
        AlignmentResult res = weighted_dtw(a, b, weights, slope, Metric::euclidean);
        benchmark::DoNotOptimize(res.distance);
    }
}
BENCHMARK(BM_WeightedDtwConstrained)->Unit(benchmark::kMillisecond);

void BM_NoveltyCurve(benchmark::State& state) {
    Rng rng(4);
    Mat seq = random_mat(rng, 300, 13, -1.0, 1.0);
    for (auto _ : state) {
        std::vector<double> curve = novelty_curve(seq, 32);
        benchmark::DoNotOptimize(curve.data());
    }
}
BENCHMARK(BM_NoveltyCurve)->Unit(benchmark::kMillisecond);

void BM_TrainForest(benchmark::State& state) {
    Rng rng(5);
    std::vector<PairVector> data;
    for (std::size_t i = 0; i < 120; ++i) {
        PairVector p;
        p.pair_id = "p" + std::to_string(i);
        int label = i % 2 == 0 ? 1 : -1;
        for (std::size_t f = 0; f < 5; ++f) {
            p.feature_names.push_back("f" + std::to_string(f));
            double shift = label > 0 && f < 2 ? 0.5 : 0.0;
            p.distances.push_back(shift + rng.real01());
        }
        p.label = label;
        data.push_back(std::move(p));
    }
    ForestConfig config;
    config.tree_count = 150;
    for (auto _ : state) {
        PlagiarismModel model = train_forest(data, config);
        benchmark::DoNotOptimize(model.trees.size());
    }
}
BENCHMARK(BM_TrainForest)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
