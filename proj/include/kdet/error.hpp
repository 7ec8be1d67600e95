#pragma once
#include <stdexcept>
#include <string>

namespace kdet {

// Violations of mathematical preconditions (wrong ring, non-unit where a unit
// is required, unsupported pair, failed witness check, guard overflow, ...).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed textual input (ring tags, element literals, matrix literals, files).
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace kdet
