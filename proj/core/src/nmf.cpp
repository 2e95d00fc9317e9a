#include "soundalike/nmf.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include "soundalike/digest.hpp"
#include "soundalike/errors.hpp"
#include "soundalike/rng.hpp"

namespace soundalike {

std::string BasisSet::content_digest() const {
    Digest d;
    d.update_u64(vectors.rows());
    d.update_u64(vectors.cols());
    d.update_u64(seed);
    d.update(source_digest);
    for (double v : vectors.data()) d.update_double(v);
    return d.hex();
}

std::string corpus_digest(const std::vector<Spectrogram>& corpus) {
    Digest d;
    d.update_u64(corpus.size());
    for (const auto& spec : corpus) {
        d.update_u64(spec.frames.rows());
        d.update_u64(spec.frames.cols());
        for (double v : spec.frames.data()) d.update_double(v);
    }
    return d.hex();
}

BasisSet draw_exemplar_bases(const std::vector<Spectrogram>& corpus,
                             std::size_t count, std::uint64_t seed) {
    if (corpus.empty()) throw DataError("empty corpus for basis sampling");
    std::size_t dim = corpus.front().frames.cols();

    // pool eligible frames in corpus order, then frame order
    std::vector<std::pair<std::size_t, std::size_t>> eligible;
    for (std::size_t s = 0; s < corpus.size(); ++s) {
        const Mat& frames = corpus[s].frames;
        if (frames.cols() != dim)
            throw DataError("corpus spectrograms disagree on dimension");
        for (std::size_t t = 0; t < frames.rows(); ++t) {
            auto row = frames.row(t);
            bool nonzero = false;
            for (double v : row)
                if (v > 0.0) { nonzero = true; break; }
            if (nonzero) eligible.emplace_back(s, t);
        }
    }
    if (eligible.size() < count)
        throw DataError("only " + std::to_string(eligible.size()) +
                        " eligible frames for " + std::to_string(count) + " bases");

    Rng rng(seed);
    auto picks = rng.sample_without_replacement(eligible.size(), count);

    BasisSet bases;
    bases.seed = seed;
    bases.source_digest = corpus_digest(corpus);
    bases.vectors = Mat(count, dim);
    for (std::size_t i = 0; i < count; ++i) {
        auto [s, t] = eligible[picks[i]];
        auto src = corpus[s].frames.row(t);
        auto dst = bases.vectors.row(i);
        for (std::size_t k = 0; k < dim; ++k) dst[k] = src[k];
    }
    return bases;
}

double generalized_kl(const Mat& m, const Mat& r) {
    if (!m.same_shape(r)) throw DataError("generalized_kl: shape mismatch");
    const auto& mv = m.data();
    const auto& rv = r.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < mv.size(); ++i) {
        double mi = mv[i], ri = rv[i];
        if (mi > 0.0) sum += mi * std::log(mi / (ri + kNmfEpsilon)) - mi + ri;
        else sum += ri;
    }
    return sum;
}

namespace {

// R(t,:) = sum_n W(n,t) * B(n,:), accumulated over ascending n
void reconstruct(const Mat& bases, const Mat& weights, Mat& recon) {
    const std::size_t frames = recon.rows(), dim = recon.cols();
    const std::size_t n_bases = bases.rows();
    std::fill(recon.data().begin(), recon.data().end(), 0.0);
    for (std::size_t t = 0; t < frames; ++t) {
        auto out = recon.row(t);
        for (std::size_t n = 0; n < n_bases; ++n) {
            double w = weights(n, t);
            if (w == 0.0) continue;
            auto b = bases.row(n);
            for (std::size_t d = 0; d < dim; ++d) out[d] += w * b[d];
        }
    }
}

} // namespace

WeightMatrix infer_weights(const Spectrogram& spectrogram, const BasisSet& bases,
                           std::size_t max_iter, double rel_tol,
                           std::vector<double>* kl_trace) {
    const Mat& m = spectrogram.frames; // T x dim
    const std::size_t frames = m.rows(), dim = m.cols();
    const std::size_t n_bases = bases.count();
    if (bases.dim() != dim)
        throw DataError("basis dimension " + std::to_string(bases.dim()) +
                        " does not match spectrum dimension " + std::to_string(dim));
    if (!all_finite(m)) throw DataError("non-finite spectrogram input");

    // column sums of B (denominator of the update), guarded
    std::vector<double> basis_sums(n_bases);
    for (std::size_t n = 0; n < n_bases; ++n) {
        double s = 0.0;
        for (double v : bases.vectors.row(n)) s += v;
        basis_sums[n] = s + kNmfEpsilon;
    }

    WeightMatrix result;
    result.values = Mat(n_bases, frames, 1.0);
    Mat& weights = result.values;

    Mat recon(frames, dim);
    Mat ratio(frames, dim);

    reconstruct(bases.vectors, weights, recon);
    double kl = generalized_kl(m, recon);
    if (kl_trace) kl_trace->push_back(kl);

    std::size_t iter = 0;
    for (; iter < max_iter; ++iter) {
        for (std::size_t t = 0; t < frames; ++t) {
            auto mrow = m.row(t);
            auto rrow = recon.row(t);
            auto orow = ratio.row(t);
            for (std::size_t d = 0; d < dim; ++d)
                orow[d] = mrow[d] / (rrow[d] + kNmfEpsilon);
        }
        for (std::size_t n = 0; n < n_bases; ++n) {
            auto b = bases.vectors.row(n);
            for (std::size_t t = 0; t < frames; ++t) {
                double num = dot(b, ratio.row(t));
                weights(n, t) *= num / basis_sums[n];
            }
        }
        reconstruct(bases.vectors, weights, recon);
        double next_kl = generalized_kl(m, recon);
        if (kl_trace) kl_trace->push_back(next_kl);
        double denom = std::abs(kl) > 0.0 ? std::abs(kl) : 1.0;
        bool converged = (kl - next_kl) / denom < rel_tol;
        kl = next_kl;
        if (converged) { ++iter; break; }
    }

    result.iterations_run = iter;
    result.final_divergence = kl;
    return result;
}

Mat nmf_feature_sequence(const Spectrogram& spectrogram, const BasisSet& bases,
                         const NmfConfig& cfg) {
    WeightMatrix wm = infer_weights(spectrogram, bases, cfg.max_iter, cfg.rel_tol);
    const std::size_t frames = wm.values.cols(), n_bases = wm.values.rows();
    Mat seq(frames, n_bases);
    for (std::size_t t = 0; t < frames; ++t) {
        auto out = seq.row(t);
        double sum = 0.0;
        for (std::size_t n = 0; n < n_bases; ++n) {
            out[n] = wm.values(n, t);
            sum += out[n];
        }
        if (cfg.normalize_weights && sum > 0.0)
            for (std::size_t n = 0; n < n_bases; ++n) out[n] /= sum;
    }
    return seq;
}

namespace {
constexpr char kBasisMagic[4] = {'S', 'A', 'B', '1'};

void put_u32(std::ofstream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<char*>(b), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 | std::uint32_t(b[2]) << 16 |
           std::uint32_t(b[3]) << 24;
}

void put_u64(std::ofstream& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v));
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
}

std::uint64_t get_u64(std::ifstream& in) {
    std::uint64_t lo = get_u32(in);
    std::uint64_t hi = get_u32(in);
    return lo | hi << 32;
}
} // namespace

// Layout: magic "SAB1", version u32, N u32, dim u32, seed u64,
// digest length u32 + bytes, then N*dim little-endian doubles, row-major
// (basis i contiguous).
void save_basis_set(const std::string& path, const BasisSet& bases) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write basis file: " + path);
    out.write(kBasisMagic, 4);
    put_u32(out, 1);
    put_u32(out, static_cast<std::uint32_t>(bases.count()));
    put_u32(out, static_cast<std::uint32_t>(bases.dim()));
    put_u64(out, bases.seed);
    put_u32(out, static_cast<std::uint32_t>(bases.source_digest.size()));
    out.write(bases.source_digest.data(),
              static_cast<std::streamsize>(bases.source_digest.size()));
    out.write(reinterpret_cast<const char*>(bases.vectors.data().data()),
              static_cast<std::streamsize>(bases.vectors.data().size() * sizeof(double)));
    if (!out) throw DataError("write failed: " + path);
}

BasisSet load_basis_set(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read basis file: " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kBasisMagic, 4) != 0)
        throw DataError("bad basis file magic: " + path);
    std::uint32_t version = get_u32(in);
    if (version != 1)
        throw DataError("unsupported basis file version " + std::to_string(version));
    std::uint32_t count = get_u32(in);
    std::uint32_t dim = get_u32(in);
    BasisSet bases;
    bases.seed = get_u64(in);
    std::uint32_t digest_len = get_u32(in);
    bases.source_digest.resize(digest_len);
    in.read(bases.source_digest.data(), digest_len);
    bases.vectors = Mat(count, dim);
    in.read(reinterpret_cast<char*>(bases.vectors.data().data()),
            static_cast<std::streamsize>(std::size_t{count} * dim * sizeof(double)));
    if (!in) throw DataError("truncated basis file: " + path);
    return bases;
}

} // namespace soundalike
