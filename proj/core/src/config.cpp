#include "soundalike/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "soundalike/digest.hpp"
#include "soundalike/errors.hpp"

namespace soundalike {

namespace {

std::uint64_t parse_u64(const std::string& v) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw DataError("bad unsigned integer '" + v + "'");
    return out;
}

std::size_t parse_size(const std::string& v) {
    return static_cast<std::size_t>(parse_u64(v));
}

double parse_real(const std::string& v) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw DataError("bad number '" + v + "'");
    return out;
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw DataError("bad boolean '" + v + "' (use true/false)");
}

std::string format_real(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw DataError("failed to format number");
    return std::string(buf, ptr);
}

// one row per key keeps set/serialize in lockstep
struct KeyEntry {
    std::function<void(EngineConfig&, const std::string&)> set;
    std::function<std::string(const EngineConfig&)> get;
};

const std::map<std::string, KeyEntry>& key_table() {
    static const std::map<std::string, KeyEntry> table = {
        {"ingest.frame_len",
         {[](EngineConfig& c, const std::string& v) { c.ingest.frame_len = parse_size(v); },
          [](const EngineConfig& c) { return std::to_string(c.ingest.frame_len); }}},
        {"ingest.hop",
         {[](EngineConfig& c, const std::string& v) { c.ingest.hop = parse_size(v); },
          [](const EngineConfig& c) { return std::to_string(c.ingest.hop); }}},
        {"ingest.fft_size",
         {[](EngineConfig& c, const std::string& v) { c.ingest.fft_size = parse_size(v); },
          [](const EngineConfig& c) { return std::to_string(c.ingest.fft_size); }}},
        {"ingest.spectrum_bins",
         {[](EngineConfig& c, const std::string& v) {
              c.ingest.spectrum_bins = parse_size(v);
          },
          [](const EngineConfig& c) { return std::to_string(c.ingest.spectrum_bins); }}},
        {"ingest.window",
         {[](EngineConfig& c, const std::string& v) {
              c.ingest.window = window_kind_from_name(v);
          },
          [](const EngineConfig& c) { return window_kind_name(c.ingest.window); }}},
        {"nmf.basis_count",
         {[](EngineConfig& c, const std::string& v) { c.nmf.basis_count = parse_size(v); },
          [](const EngineConfig& c) { return std::to_string(c.nmf.basis_count); }}},
        {"nmf.max_iter",
         {[](EngineConfig& c, const std::string& v) { c.nmf.max_iter = parse_size(v); },
          [](const EngineConfig& c) { return std::to_string(c.nmf.max_iter); }}},
        {"nmf.rel_tol",
         {[](EngineConfig& c, const std::string& v) { c.nmf.rel_tol = parse_real(v); },
          [](const EngineConfig& c) { return format_real(c.nmf.rel_tol); }}},
        {"nmf.normalize_weights",
         {[](EngineConfig& c, const std::string& v) {
              c.nmf.normalize_weights = parse_bool(v);
          },
          [](const EngineConfig& c) {
              return std::string(c.nmf.normalize_weights ? "true" : "false");
          }}},
        {"bases.seed",
         {[](EngineConfig& c, const std::string& v) { c.bases_seed = parse_u64(v); },
          [](const EngineConfig& c) { return std::to_string(c.bases_seed); }}},
        {"align.w_sub",
         {[](EngineConfig& c, const std::string& v) {
              c.align.weights.substitution = parse_real(v);
          },
          [](const EngineConfig& c) { return format_real(c.align.weights.substitution); }}},
        {"align.w_ins",
         {[](EngineConfig& c, const std::string& v) {
              c.align.weights.insertion = parse_real(v);
          },
          [](const EngineConfig& c) { return format_real(c.align.weights.insertion); }}},
        {"align.w_del",
         {[](EngineConfig& c, const std::string& v) {
              c.align.weights.deletion = parse_real(v);
          },
          [](const EngineConfig& c) { return format_real(c.align.weights.deletion); }}},
        {"align.window",
         {[](EngineConfig& c, const std::string& v) {
              c.align.slope.window = parse_size(v);
          },
          [](const EngineConfig& c) { return std::to_string(c.align.slope.window); }}},
        {"align.max_slope",
         {[](EngineConfig& c, const std::string& v) {
              c.align.slope.max_slope = parse_real(v);
          },
          [](const EngineConfig& c) { return format_real(c.align.slope.max_slope); }}},
        {"align.use_slope",
         {[](EngineConfig& c, const std::string& v) { c.align.use_slope = parse_bool(v); },
          [](const EngineConfig& c) {
              return std::string(c.align.use_slope ? "true" : "false");
          }}},
        {"align.normalize",
         {[](EngineConfig& c, const std::string& v) { c.align.normalize = parse_bool(v); },
          [](const EngineConfig& c) {
              return std::string(c.align.normalize ? "true" : "false");
          }}},
        {"align.sentinel_cap",
         {[](EngineConfig& c, const std::string& v) {
              c.align.sentinel_cap = parse_real(v);
          },
          [](const EngineConfig& c) { return format_real(c.align.sentinel_cap); }}},
        {"forest.trees",
         {[](EngineConfig& c, const std::string& v) {
              c.forest.tree_count = parse_size(v);
          },
          [](const EngineConfig& c) { return std::to_string(c.forest.tree_count); }}},
        {"forest.seed",
         {[](EngineConfig& c, const std::string& v) { c.forest.seed = parse_u64(v); },
          [](const EngineConfig& c) { return std::to_string(c.forest.seed); }}},
        {"forest.keep_fraction",
         {[](EngineConfig& c, const std::string& v) {
              c.forest.keep_fraction = parse_real(v);
          },
          [](const EngineConfig& c) { return format_real(c.forest.keep_fraction); }}},
        {"split.ratio",
         {[](EngineConfig& c, const std::string& v) { c.split.ratio = parse_real(v); },
          [](const EngineConfig& c) { return format_real(c.split.ratio); }}},
        {"split.seed",
         {[](EngineConfig& c, const std::string& v) { c.split.seed = parse_u64(v); },
          [](const EngineConfig& c) { return std::to_string(c.split.seed); }}},
        {"split.stratified",
         {[](EngineConfig& c, const std::string& v) {
              c.split.stratified = parse_bool(v);
          },
          [](const EngineConfig& c) {
              return std::string(c.split.stratified ? "true" : "false");
          }}},
        {"synth.seed",
         {[](EngineConfig& c, const std::string& v) { c.synth.seed = parse_u64(v); },
          [](const EngineConfig& c) { return std::to_string(c.synth.seed); }}},
        {"synth.notes",
         {[](EngineConfig& c, const std::string& v) {
              c.synth.notes_per_song = parse_size(v);
          },
          [](const EngineConfig& c) { return std::to_string(c.synth.notes_per_song); }}},
        {"synth.note_seconds",
         {[](EngineConfig& c, const std::string& v) {
              c.synth.note_seconds = parse_real(v);
          },
          [](const EngineConfig& c) { return format_real(c.synth.note_seconds); }}},
        {"synth.stretch",
         {[](EngineConfig& c, const std::string& v) { c.synth.stretch = parse_bool(v); },
          [](const EngineConfig& c) {
              return std::string(c.synth.stretch ? "true" : "false");
          }}},
        {"synth.pitch",
         {[](EngineConfig& c, const std::string& v) { c.synth.pitch = parse_bool(v); },
          [](const EngineConfig& c) {
              return std::string(c.synth.pitch ? "true" : "false");
          }}},
        {"synth.noise",
         {[](EngineConfig& c, const std::string& v) { c.synth.noise = parse_bool(v); },
          [](const EngineConfig& c) {
              return std::string(c.synth.noise ? "true" : "false");
          }}},
        {"synth.level",
         {[](EngineConfig& c, const std::string& v) { c.synth.level = parse_bool(v); },
          [](const EngineConfig& c) {
              return std::string(c.synth.level ? "true" : "false");
          }}},
        {"descriptors.rolloff_fraction",
         {[](EngineConfig& c, const std::string& v) {
              c.rolloff_fraction = parse_real(v);
          },
          [](const EngineConfig& c) { return format_real(c.rolloff_fraction); }}},
        {"descriptors.novelty_kernel_half",
         {[](EngineConfig& c, const std::string& v) {
              c.novelty_kernel_half = parse_size(v);
          },
          [](const EngineConfig& c) {
              return std::to_string(c.novelty_kernel_half);
          }}},
    };
    return table;
}

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t");
    if (begin == std::string::npos) return "";
    auto end = s.find_last_not_of(" \t");
    return s.substr(begin, end - begin + 1);
}

} // namespace

void set_config_key(EngineConfig& config, const std::string& key,
                    const std::string& value) {
    auto it = key_table().find(key);
    if (it == key_table().end()) throw DataError("unknown configuration key '" + key + "'");
    try {
        it->second.set(config, value);
    } catch (const DataError& err) {
        throw DataError("configuration key '" + key + "': " + err.what());
    }
}

void apply_config_file(EngineConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read config file: " + path.string());
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw DataError("config line " + std::to_string(row) +
                            ": expected key=value");
        set_config_key(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

std::string serialize_config(const EngineConfig& config) {
    std::ostringstream out;
    for (const auto& [key, entry] : key_table())
        out << key << '=' << entry.get(config) << '\n';
    return out.str();
}

std::string feature_config_digest(const EngineConfig& config,
                                  const std::string& basis_digest) {
    static const char* kFeatureKeys[] = {
        "ingest.frame_len",   "ingest.hop",
        "ingest.fft_size",    "ingest.spectrum_bins",
        "ingest.window",      "nmf.basis_count",
        "nmf.max_iter",       "nmf.rel_tol",
        "nmf.normalize_weights", "descriptors.rolloff_fraction",
        "descriptors.novelty_kernel_half",
    };
    Digest digest;
    for (const char* key : kFeatureKeys) {
        digest.update(key, std::char_traits<char>::length(key));
        digest.update("=");
        digest.update(key_table().at(key).get(config));
        digest.update("\n");
    }
    digest.update("bases=");
    digest.update(basis_digest);
    return digest.hex();
}

} // namespace soundalike
