#pragma once

#include <stdexcept>
#include <string>

namespace nimp {

// Malformed inputs: bad indices, degenerate geometry, unreadable files.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite values produced where finiteness is a contract (training, render).
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nimp
