#include "soundalike/cache.hpp"

#include <cstring>
#include <fstream>
#include <iostream>

#include "soundalike/digest.hpp"
#include "soundalike/errors.hpp"

namespace soundalike {

namespace {

constexpr char kMagic[4] = {'S', 'F', 'B', '1'};

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_double(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(out, bits);
}

struct Reader {
    const std::string& data;
    std::size_t at = 0;

    std::uint64_t u64() {
        if (at + 8 > data.size()) throw DataError("feature cache entry truncated");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(
                     static_cast<unsigned char>(data[at + static_cast<std::size_t>(i)]))
                 << (8 * i);
        at += 8;
        return v;
    }

    double f64() {
        std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }

    std::string bytes(std::size_t n) {
        if (at + n > data.size()) throw DataError("feature cache entry truncated");
        std::string s = data.substr(at, n);
        at += n;
        return s;
    }
};

} // namespace

void save_bundle(const std::filesystem::path& path, const FeatureBundle& bundle) {
    std::string payload;
    put_u64(payload, 1); // format version
    put_u64(payload, bundle.frame_times.size());
    for (double t : bundle.frame_times) put_double(payload, t);
    put_u64(payload, bundle.classes.size());
    for (const auto& [name, seq] : bundle.classes) {
        put_u64(payload, name.size());
        payload.append(name);
        put_u64(payload, seq.rows());
        put_u64(payload, seq.cols());
        for (std::size_t r = 0; r < seq.rows(); ++r)
            for (std::size_t c = 0; c < seq.cols(); ++c)
                put_double(payload, seq(r, c));
    }
    Digest digest;
    digest.update(payload.data(), payload.size());

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write feature cache entry: " + path.string());
    out.write(kMagic, sizeof kMagic);
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    std::string trailer;
    put_u64(trailer, digest.value());
    out.write(trailer.data(), static_cast<std::streamsize>(trailer.size()));
    if (!out) throw DataError("write failed: " + path.string());
}

FeatureBundle load_bundle(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read feature cache entry: " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    if (data.size() < sizeof kMagic + 16 ||
        std::memcmp(data.data(), kMagic, sizeof kMagic) != 0)
        throw DataError("not a feature cache entry: " + path.string());

    const std::string payload = data.substr(sizeof kMagic, data.size() - sizeof kMagic - 8);
    Digest digest;
    digest.update(payload.data(), payload.size());
    Reader trailer{data, data.size() - 8};
    if (trailer.u64() != digest.value())
        throw DataError("feature cache entry failed its digest check: " + path.string());

    Reader r{payload};
    if (r.u64() != 1) throw DataError("unsupported feature cache version");
    FeatureBundle bundle;
    std::uint64_t n_times = r.u64();
    bundle.frame_times.reserve(n_times);
    for (std::uint64_t i = 0; i < n_times; ++i) bundle.frame_times.push_back(r.f64());
    std::uint64_t n_classes = r.u64();
    for (std::uint64_t c = 0; c < n_classes; ++c) {
        std::string name = r.bytes(r.u64());
        std::uint64_t rows = r.u64();
        std::uint64_t cols = r.u64();
        if (cols != 0 && rows > (payload.size() / 8) / cols)
            throw DataError("feature cache entry has an implausible shape");
        Mat seq(rows, cols);
        for (std::uint64_t i = 0; i < rows; ++i)
            for (std::uint64_t j = 0; j < cols; ++j) seq(i, j) = r.f64();
        bundle.classes.emplace(std::move(name), std::move(seq));
    }
    if (r.at != payload.size())
        throw DataError("feature cache entry has trailing bytes: " + path.string());
    return bundle;
}

FeatureCache::FeatureCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw DataError("cannot create cache directory: " + dir_.string());
}

std::filesystem::path FeatureCache::entry_path(const std::string& audio_digest,
                                               const std::string& config_digest) const {
    return dir_ / (audio_digest + "-" + config_digest + ".features");
}

std::optional<FeatureBundle> FeatureCache::try_load(
    const std::string& audio_digest, const std::string& config_digest) const {
    const auto path = entry_path(audio_digest, config_digest);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec) || ec) return std::nullopt;
    try {
        return load_bundle(path);
    } catch (const DataError& err) {
        std::cerr << "warning: " << err.what() << "; recomputing\n";
        return std::nullopt;
    }
}

void FeatureCache::store(const std::string& audio_digest,
                         const std::string& config_digest,
                         const FeatureBundle& bundle) const {
    const auto final_path = entry_path(audio_digest, config_digest);
    auto temp = final_path;
    temp += ".tmp";
    save_bundle(temp, bundle);
    std::error_code ec;
    std::filesystem::rename(temp, final_path, ec);
    if (ec) {
        std::filesystem::remove(temp);
        throw DataError("cannot finalize cache entry: " + final_path.string());
    }
}

} // namespace soundalike
