#pragma once

#include <stdexcept>
#include <string>

namespace soundalike {

// Malformed or inconsistent input data: unreadable files, bad manifests,
// dimension mismatches, single-class training sets. Maps to CLI exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace soundalike
