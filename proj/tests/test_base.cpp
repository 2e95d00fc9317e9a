#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "soundalike/audio.hpp"
#include "soundalike/config.hpp"
#include "soundalike/digest.hpp"
#include "soundalike/errors.hpp"
#include "soundalike/fft.hpp"
#include "soundalike/mat.hpp"
#include "soundalike/rng.hpp"
#include "soundalike/spectrogram.hpp"

using namespace soundalike;

namespace {

std::filesystem::path scratch_dir() {
    auto dir = std::filesystem::temp_directory_path() / "soundalike-test-base";
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("mat stores rows contiguously") {
    Mat m(2, 3);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 3; ++c) m(r, c) = static_cast<double>(r * 3 + c);
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(m.row(1)[0] == 3.0);
    CHECK(m.data().size() == 6);
    CHECK(m.data()[5] == 5.0);
}

TEST_CASE("vector helpers match hand values") {
    std::vector<double> a{1.0, 2.0, -2.0};
    std::vector<double> b{3.0, 0.5, 1.0};
    CHECK(dot(a, b) == doctest::Approx(3.0 + 1.0 - 2.0).epsilon(1e-15));
    CHECK(l1_norm(a) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(l2_norm(a) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(all_finite(a));
    std::vector<double> bad{1.0, std::numeric_limits<double>::infinity()};
    CHECK_FALSE(all_finite(bad));
}

TEST_CASE("rng streams are reproducible per seed") {
    Rng a(42), b(42), c(43);
    bool same = true, differ = false;
    for (int i = 0; i < 64; ++i) {
        auto x = a.next_u64();
        same = same && x == b.next_u64();
        differ = differ || x != c.next_u64();
    }
    CHECK(same);
    CHECK(differ);
}

TEST_CASE("rng real01 stays inside the half-open unit interval") {
    Rng r(7);
    for (int i = 0; i < 10000; ++i) {
        double x = r.real01();
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
    double lo = r.real(2.0, 5.0);
    CHECK(lo >= 2.0);
    CHECK(lo < 5.0);
}

TEST_CASE("rng shuffle permutes and sampling avoids repeats") {
    Rng r(11);
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7};
    auto orig = v;
    r.shuffle(v);
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == orig);

    auto picks = r.sample_without_replacement(100, 20);
    std::set<std::size_t> uniq(picks.begin(), picks.end());
    CHECK(uniq.size() == 20);
    for (std::size_t p : picks) CHECK(p < 100);

    Rng r2(11);
    std::vector<int> v2 = orig;
    r2.shuffle(v2);
    CHECK(v2 == v);
}

TEST_CASE("derived per-stream seeds differ") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t t = 0; t < 200; ++t) seen.insert(derive_seed(99, t));
    CHECK(seen.size() == 200);
    CHECK(derive_seed(99, 3) == derive_seed(99, 3));
    CHECK(derive_seed(98, 3) != derive_seed(99, 3));
}

TEST_CASE("digest matches a direct fnv-1a computation") {
    // reference computed inline so the library constants cannot drift
    auto reference = [](const std::string& bytes) {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (unsigned char ch : bytes) {
            h ^= ch;
            h *= 0x100000001b3ull;
        }
        return h;
    };
    Digest d;
    d.update("abc", 3);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(reference("abc")));
    CHECK(d.hex() == std::string(buf));
}

TEST_CASE("file digest covers exactly the file bytes") {
    auto path = scratch_dir() / "digest.bin";
    std::ofstream(path, std::ios::binary) << "soundalike";
    Digest d;
    d.update("soundalike", 10);
    CHECK(file_digest(path) == d.hex());
}

TEST_CASE("fft agrees with the direct transform") {
    Rng r(5);
    std::vector<double> signal(32);
    for (double& x : signal) x = r.real(-1.0, 1.0);

    auto expected = oracles::dft_oracle(signal);

    Fft fft(32);
    std::vector<std::complex<double>> buf(32);
    for (std::size_t i = 0; i < 32; ++i) buf[i] = signal[i];
    fft.forward(buf);
    for (std::size_t k = 0; k < 32; ++k) {
        CHECK(std::abs(buf[k] - expected[k]) < 1e-9);
    }

    auto mags = fft.real_magnitudes(signal, 16);
    REQUIRE(mags.size() == 16);
    for (std::size_t k = 0; k < 16; ++k)
        CHECK(mags[k] == doctest::Approx(std::abs(expected[k])).epsilon(1e-9));
}

TEST_CASE("fft zero-pads short input") {
    Fft fft(16);
    std::vector<double> one{1.0};
    auto mags = fft.real_magnitudes(one, 8);
    for (double m : mags) CHECK(m == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("wav round-trip preserves samples to 16-bit precision") {
    AudioTrack track;
    track.sample_rate = 16000;
    Rng r(9);
    for (int i = 0; i < 1600; ++i) track.samples.push_back(r.real(-0.9, 0.9));

    auto path = (scratch_dir() / "roundtrip.wav").string();
    write_wav(path, track);
    AudioTrack back = decode(path);
    REQUIRE(back.samples.size() == track.samples.size());
    CHECK(back.sample_rate == 16000);
    // encode rounds x * 32767, decode divides by 32768, so the bound is
    // (|x| + 0.5) / 32768 rather than one quantization step
    for (std::size_t i = 0; i < track.samples.size(); ++i)
        CHECK(std::abs(back.samples[i] - track.samples[i]) <=
              (std::abs(track.samples[i]) + 0.5) / 32768.0 + 1e-12);
}

TEST_CASE("decode rejects a non-wav file") {
    auto path = (scratch_dir() / "not-audio.wav").string();
    std::ofstream(path, std::ios::binary) << "this is not riff data";
    CHECK_THROWS_AS(decode(path), DataError);
}

TEST_CASE("resample at the target rate passes samples through untouched") {
    AudioTrack track;
    track.sample_rate = kTargetRate;
    Rng r(3);
    for (int i = 0; i < 100; ++i) track.samples.push_back(r.real(-1.0, 1.0));
    AudioTrack out = resample(track);
    CHECK(out.sample_rate == kTargetRate);
    REQUIRE(out.samples.size() == track.samples.size());
    for (std::size_t i = 0; i < out.samples.size(); ++i)
        CHECK(out.samples[i] == track.samples[i]); // bitwise passthrough
}

TEST_CASE("resampling a sine keeps its energy and stretches its length") {
    AudioTrack track;
    track.sample_rate = 8000;
    for (int i = 0; i < 8000; ++i)
        track.samples.push_back(0.5 * std::sin(2.0 * std::numbers::pi * 440.0 * i / 8000.0));
    AudioTrack out = resample(track);
    CHECK(out.sample_rate == kTargetRate);
    CHECK(out.samples.size() >= 15998);
    CHECK(out.samples.size() <= 16002);
    double energy = 0.0;
    // skip the filter edges when measuring
    for (std::size_t i = 400; i + 400 < out.samples.size(); ++i)
        energy += out.samples[i] * out.samples[i];
    double rms = std::sqrt(energy / static_cast<double>(out.samples.size() - 800));
    CHECK(rms == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(1e-2));
}

TEST_CASE("framing walks the hop grid and rejects short tracks") {
    AudioTrack track;
    track.sample_rate = kTargetRate;
    track.samples.assign(1600, 0.25);
    FrameSet fs = frame(track, 640, 320);
    CHECK(fs.frames.size() == (1600 - 640) / 320 + 1);
    CHECK(fs.frames[0].size() == 640);
    CHECK(fs.frames[1][0] == 0.25);

    AudioTrack tiny;
    tiny.samples.assign(639, 0.0);
    CHECK_THROWS_AS(frame(tiny, 640, 320), DataError);
}

TEST_CASE("spectrogram shape and resolution follow the transform config") {
    AudioTrack track;
    track.sample_rate = kTargetRate;
    for (int i = 0; i < 16000; ++i)
        track.samples.push_back(std::sin(2.0 * std::numbers::pi * 1000.0 * i / 16000.0));
    IngestConfig cfg;
    Spectrogram spec = magnitude_spectrogram(frame(track, cfg.frame_len, cfg.hop), cfg);
    CHECK(spec.frames.cols() == 1024);
    CHECK(spec.bin_hz == doctest::Approx(7.8125).epsilon(1e-12));

    // a 1 kHz tone concentrates at bin 128
    auto row = spec.frames.row(1);
    std::size_t argmax = 0;
    for (std::size_t k = 1; k < row.size(); ++k)
        if (row[k] > row[argmax]) argmax = k;
    CHECK(argmax == 128);
}

TEST_CASE("window names map to kinds both ways") {
    CHECK(window_kind_from_name("hann") == WindowKind::hann);
    CHECK(window_kind_from_name("rect") == WindowKind::rect);
    CHECK(window_kind_name(WindowKind::hann) == std::string("hann"));
    CHECK_THROWS_AS(window_kind_from_name("hamming"), DataError);
}

TEST_CASE("config keys set and serialize") {
    EngineConfig cfg;
    set_config_key(cfg, "forest.trees", "25");
    set_config_key(cfg, "align.w_sub", "2.5");
    set_config_key(cfg, "split.stratified", "false");
    CHECK(cfg.forest.tree_count == 25);
    CHECK(cfg.align.weights.substitution == 2.5);
    CHECK_FALSE(cfg.split.stratified);

    std::string text = serialize_config(cfg);
    CHECK(text.find("forest.trees=25") != std::string::npos);
    CHECK(text.find("align.w_sub=2.5") != std::string::npos);

    CHECK_THROWS_AS(set_config_key(cfg, "no.such.key", "1"), DataError);
    CHECK_THROWS_AS(set_config_key(cfg, "forest.trees", "many"), DataError);
}

TEST_CASE("config files override defaults and ignore comments") {
    auto path = scratch_dir() / "engine.cfg";
    std::ofstream(path) << "# comment line\n"
                        << "forest.trees = 33\n"
                        << "\n"
                        << "nmf.basis_count=16\n";
    EngineConfig cfg;
    apply_config_file(cfg, path);
    CHECK(cfg.forest.tree_count == 33);
    CHECK(cfg.nmf.basis_count == 16);

    std::ofstream(path) << "forest.trees\n";
    EngineConfig cfg2;
    CHECK_THROWS_AS(apply_config_file(cfg2, path), DataError);
}

TEST_CASE("feature digest tracks only feature-bearing settings") {
    EngineConfig a, b;
    std::string bases = "deadbeef";
    CHECK(feature_config_digest(a, bases) == feature_config_digest(b, bases));

    set_config_key(b, "forest.trees", "10"); // classifier settings do not matter
    CHECK(feature_config_digest(a, bases) == feature_config_digest(b, bases));

    set_config_key(b, "nmf.basis_count", "32");
    CHECK(feature_config_digest(a, bases) != feature_config_digest(b, bases));

    EngineConfig c;
    set_config_key(c, "descriptors.rolloff_fraction", "0.9");
    CHECK(feature_config_digest(a, bases) != feature_config_digest(c, bases));
    CHECK(feature_config_digest(a, bases) != feature_config_digest(a, "feedface"));
}
