#pragma once

#include <stdexcept>
#include <string>

namespace uavsat {

// File and decode problems. The CLI maps this to exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// Violated operation preconditions or unsatisfiable requests (no overlap,
// target not bracketed, ...). The CLI maps this to exit code 3.
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void require(bool condition, const std::string& msg) {
    if (!condition) {
        throw DomainError(msg);
    }
}

}  // namespace uavsat
