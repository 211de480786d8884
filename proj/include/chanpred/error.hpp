// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <stdexcept>
#include <string>

namespace chanpred {

/// Precondition or argument-range violation.
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// The correlation matrix could not be factorized, even after escalating the
/// diagonal loading.
class singularity_error : public std::runtime_error {
public:
    singularity_error(const std::string& what, double condition_estimate)
        : std::runtime_error(what), condition_(condition_estimate) {}

    double condition_estimate() const noexcept { return condition_; }

private:
    double condition_;
};

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class io_error : public std::runtime_error {
public:
    io_error(const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(path) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

namespace detail {

inline void require(bool condition, const char* message) {
    if (!condition) throw domain_error(message);
}

inline void require(bool condition, const std::string& message) {
    if (!condition) throw domain_error(message);
}

} // namespace detail
} // namespace chanpred
