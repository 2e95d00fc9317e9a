#include "soundalike/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "soundalike/errors.hpp"
#include "soundalike/rng.hpp"

namespace soundalike {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

Manifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read manifest: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("manifest is empty: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split_fields(line);
    const bool has_genre = header.size() == 5 && header[4] == "genre";
    if (!(header.size() == 4 || has_genre) || header[0] != "pair_id" ||
        header[1] != "path_a" || header[2] != "path_b" || header[3] != "label")
        throw DataError("manifest header must be pair_id,path_a,path_b,label[,genre]");

    const auto base = path.has_parent_path() ? path.parent_path()
                                             : std::filesystem::path(".");
    Manifest manifest;
    std::set<std::string> seen;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_fields(line);
        if (fields.size() != header.size())
            throw DataError("manifest row " + std::to_string(row) + ": expected " +
                            std::to_string(header.size()) + " fields");
        ManifestEntry entry;
        entry.pair_id = fields[0];
        if (entry.pair_id.empty())
            throw DataError("manifest row " + std::to_string(row) + ": empty pair_id");
        if (!seen.insert(entry.pair_id).second)
            throw DataError("manifest: duplicate pair_id '" + entry.pair_id + "'");
        auto resolve = [&](const std::string& p) {
            if (p.empty())
                throw DataError("manifest row " + std::to_string(row) + ": empty path");
            std::filesystem::path fp(p);
            return fp.is_absolute() ? fp : base / fp;
        };
        entry.path_a = resolve(fields[1]);
        entry.path_b = resolve(fields[2]);
        if (fields[3] == "+1") {
            entry.label = 1;
        } else if (fields[3] == "-1") {
            entry.label = -1;
        } else {
            throw DataError("manifest row " + std::to_string(row) +
                            ": label must be +1 or -1, got '" + fields[3] + "'");
        }
        if (has_genre) entry.genre = fields[4];
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
    bool any_genre = std::any_of(manifest.entries.begin(), manifest.entries.end(),
                                 [](const ManifestEntry& e) { return !e.genre.empty(); });
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write manifest: " + path.string());
    out << "pair_id,path_a,path_b,label";
    if (any_genre) out << ",genre";
    out << '\n';
    for (const ManifestEntry& e : manifest.entries) {
        for (const std::string& field : {e.pair_id, e.path_a.string(), e.path_b.string()})
            if (field.find_first_of(",\n\r") != std::string::npos)
                throw DataError("manifest field may not contain commas: " + field);
        out << e.pair_id << ',' << e.path_a.string() << ',' << e.path_b.string() << ','
            << (e.label > 0 ? "+1" : "-1");
        if (any_genre) out << ',' << e.genre;
        out << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

SplitResult split(const Manifest& manifest, const SplitConfig& config) {
    if (manifest.entries.empty()) throw DataError("split: empty manifest");
    if (!(config.ratio >= 0.0 && config.ratio <= 1.0))
        throw DataError("split: ratio must be in [0, 1]");

    Rng rng(config.seed);
    SplitResult result;
    auto deal = [&](std::vector<const ManifestEntry*>& group) {
        rng.shuffle(group);
        auto take = static_cast<std::size_t>(
            std::ceil(config.ratio * static_cast<double>(group.size())));
        take = std::min(take, group.size());
        for (std::size_t i = 0; i < group.size(); ++i)
            (i < take ? result.train : result.test).entries.push_back(*group[i]);
    };

    if (config.stratified) {
        std::vector<const ManifestEntry*> pos, neg;
        for (const ManifestEntry& e : manifest.entries)
            (e.label > 0 ? pos : neg).push_back(&e);
        deal(pos);
        deal(neg);
    } else {
        std::vector<const ManifestEntry*> all;
        for (const ManifestEntry& e : manifest.entries) all.push_back(&e);
        deal(all);
    }
    return result;
}

} // namespace soundalike
