#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace soundalike {

// FNV-1a 64-bit content digest. Not cryptographic; used to key caches and
// to tie models to the basis set they were trained against.
class Digest {
public:
    Digest& update(const void* bytes, std::size_t len);
    Digest& update(const std::string& s) { return update(s.data(), s.size()); }
    Digest& update_u64(std::uint64_t v);
    Digest& update_double(double v);

    std::uint64_t value() const { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 0xCBF29CE484222325ULL;
};

// Digest of a whole file's bytes. Throws DataError when unreadable.
std::string file_digest(const std::string& path);

} // namespace soundalike
