#include "soundalike/audio.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "soundalike/errors.hpp"

namespace soundalike {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::uint32_t read_u32(const unsigned char* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
           std::uint32_t(p[3]) << 24;
}

std::uint16_t read_u16(const unsigned char* p) {
    return std::uint16_t(p[0] | p[1] << 8);
}

double sample_from_bytes(const unsigned char* p, int bits) {
    switch (bits) {
        case 8:
            // 8-bit WAV is unsigned
            return (static_cast<double>(*p) - 128.0) / 128.0;
        case 16: {
            std::int16_t v;
            std::memcpy(&v, p, 2);
            return static_cast<double>(v) / 32768.0;
        }
        case 24: {
            std::int32_t v = p[0] | p[1] << 8 | p[2] << 16;
            if (v & 0x800000) v |= ~0xFFFFFF; // sign extend
            return static_cast<double>(v) / 8388608.0;
        }
        case 32: {
            float f;
            std::memcpy(&f, p, 4);
            double d = static_cast<double>(f);
            if (d > 1.0) d = 1.0;
            if (d < -1.0) d = -1.0;
            return d;
        }
        default:
            return 0.0;
    }
}

// zeroth-order modified Bessel function, power series
double bessel_i0(double x) {
    double sum = 1.0, term = 1.0;
    double half = x / 2.0;
    for (int k = 1; k < 64; ++k) {
        term *= (half / k) * (half / k);
        sum += term;
        if (term < 1e-16 * sum) break;
    }
    return sum;
}

} // namespace

AudioTrack decode(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open audio file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
        throw DataError("not a RIFF/WAVE file: " + path);

    int channels = 0, bits = 0, rate = 0, format = 0;
    const unsigned char* data = nullptr;
    std::size_t data_len = 0;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const unsigned char* hdr = bytes.data() + pos;
        std::uint32_t chunk_len = read_u32(hdr + 4);
        const unsigned char* body = hdr + 8;
        if (pos + 8 + chunk_len > bytes.size())
            chunk_len = static_cast<std::uint32_t>(bytes.size() - pos - 8);
        if (std::memcmp(hdr, "fmt ", 4) == 0 && chunk_len >= 16) {
            format = read_u16(body);
            channels = read_u16(body + 2);
            rate = static_cast<int>(read_u32(body + 4));
            bits = read_u16(body + 14);
        } else if (std::memcmp(hdr, "data", 4) == 0) {
            data = body;
            data_len = chunk_len;
        }
        pos += 8 + chunk_len + (chunk_len & 1); // chunks are word-aligned
    }

    if (format == 0) throw DataError("missing fmt chunk: " + path);
    bool pcm_int = format == 1 && (bits == 8 || bits == 16 || bits == 24);
    bool pcm_float = format == 3 && bits == 32;
    if (!pcm_int && !pcm_float)
        throw DataError("unsupported codec (format " + std::to_string(format) + ", " +
                        std::to_string(bits) + "-bit): " + path);
    if (channels < 1 || channels > 2)
        throw DataError("unsupported channel count " + std::to_string(channels) + ": " + path);
    if (data == nullptr || data_len == 0) throw DataError("zero-length audio: " + path);

    std::size_t bytes_per_sample = static_cast<std::size_t>(bits) / 8;
    std::size_t stride = bytes_per_sample * static_cast<std::size_t>(channels);
    std::size_t n = data_len / stride;
    if (n == 0) throw DataError("zero-length audio: " + path);

    AudioTrack track;
    track.sample_rate = rate;
    track.source_path = path;
    track.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c)
            acc += sample_from_bytes(data + i * stride + c * bytes_per_sample, bits);
        track.samples[i] = acc / channels;
    }
    return track;
}

void write_wav(const std::string& path, const AudioTrack& track) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write wav: " + path);
    auto put_u32 = [&](std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
        out.write(reinterpret_cast<char*>(b), 4);
    };
    auto put_u16 = [&](std::uint16_t v) {
        unsigned char b[2] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8)};
        out.write(reinterpret_cast<char*>(b), 2);
    };
    std::uint32_t data_len = static_cast<std::uint32_t>(track.samples.size() * 2);
    out.write("RIFF", 4);
    put_u32(36 + data_len);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    put_u32(16);
    put_u16(1); // PCM
    put_u16(1); // mono
    put_u32(static_cast<std::uint32_t>(track.sample_rate));
    put_u32(static_cast<std::uint32_t>(track.sample_rate * 2));
    put_u16(2);
    put_u16(16);
    out.write("data", 4);
    put_u32(data_len);
    for (double s : track.samples) {
        double clamped = s > 1.0 ? 1.0 : (s < -1.0 ? -1.0 : s);
        auto v = static_cast<std::int16_t>(std::lrint(clamped * 32767.0));
        unsigned char b[2] = {static_cast<unsigned char>(v & 0xFF),
                              static_cast<unsigned char>((v >> 8) & 0xFF)};
        out.write(reinterpret_cast<char*>(b), 2);
    }
    if (!out) throw DataError("write failed: " + path);
}

AudioTrack resample(const AudioTrack& track) {
    if (track.sample_rate < 8000 || track.sample_rate > 96000)
        throw DataError("sample rate " + std::to_string(track.sample_rate) +
                        " outside supported range [8000, 96000]");
    if (track.sample_rate == kTargetRate) return track;

    const double src = track.sample_rate;
    const double ratio = kTargetRate / src;
    const std::size_t in_len = track.samples.size();
    const auto out_len =
        static_cast<std::size_t>(std::llround(static_cast<double>(in_len) * ratio));

    // Kaiser-windowed sinc, beta 8 (~80 dB stopband), 24 zero crossings per
    // side at the cutoff. Cutoff sits at 94.5% of the narrower Nyquist.
    const double cutoff = 0.945 * 0.5 * std::min(1.0, ratio); // cycles per input sample
    const double beta = 8.0;
    const double i0_beta = bessel_i0(beta);
    const int half_width = static_cast<int>(std::ceil(24.0 / (2.0 * cutoff)));

    AudioTrack out;
    out.sample_rate = kTargetRate;
    out.source_path = track.source_path;
    out.samples.resize(out_len);

    for (std::size_t n = 0; n < out_len; ++n) {
        const double t = static_cast<double>(n) / ratio; // position in input samples
        const auto k0 = static_cast<long>(std::ceil(t)) - half_width;
        const auto k1 = static_cast<long>(std::floor(t)) + half_width;
        double acc = 0.0, wsum = 0.0;
        for (long k = k0; k <= k1; ++k) {
            const double tau = t - static_cast<double>(k);
            const double x = tau / half_width;
            if (x <= -1.0 || x >= 1.0) continue;
            const double window = bessel_i0(beta * std::sqrt(1.0 - x * x)) / i0_beta;
            const double arg = 2.0 * cutoff * tau;
            const double sinc = arg == 0.0 ? 1.0 : std::sin(kPi * arg) / (kPi * arg);
            const double h = 2.0 * cutoff * sinc * window;
            wsum += h;
            if (k >= 0 && k < static_cast<long>(in_len)) acc += track.samples[k] * h;
        }
        out.samples[n] = wsum > 0.0 ? acc / wsum : 0.0;
    }
    return out;
}

FrameSet frame(const AudioTrack& track, std::size_t frame_len, std::size_t hop) {
    if (track.samples.size() < frame_len)
        throw DataError("track shorter than one frame (" +
                        std::to_string(track.samples.size()) + " < " +
                        std::to_string(frame_len) + " samples)");
    FrameSet fs;
    fs.frame_len = frame_len;
    fs.hop = hop;
    std::size_t count = (track.samples.size() - frame_len) / hop + 1;
    fs.frames.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
        auto begin = track.samples.begin() + static_cast<std::ptrdiff_t>(t * hop);
        fs.frames.emplace_back(begin, begin + static_cast<std::ptrdiff_t>(frame_len));
    }
    return fs;
}

} // namespace soundalike
