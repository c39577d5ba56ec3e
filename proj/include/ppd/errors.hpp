#pragma once

#include <stdexcept>
#include <string>

namespace ppd {

// File/format problems: unreadable inputs, malformed headers, bad corpora.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Semantically invalid data: empty corpus, single-class training set,
// dimension drift, non-convergence.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace ppd
