#include "soundalike/digest.hpp"

#include <cstring>
#include <fstream>

#include "soundalike/errors.hpp"

namespace soundalike {

Digest& Digest::update(const void* bytes, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(bytes);
    std::uint64_t h = state_;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001B3ULL;
    }
    state_ = h;
    return *this;
}

Digest& Digest::update_u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    return update(b, 8);
}

Digest& Digest::update_double(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    return update_u64(bits);
}

std::string Digest::hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    std::uint64_t v = state_;
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xF];
        v >>= 4;
    }
    return out;
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read file for digest: " + path);
    Digest d;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
        d.update(buf, static_cast<std::size_t>(in.gcount()));
    return d.hex();
}

} // namespace soundalike
