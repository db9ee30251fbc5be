// SPDX-FileCopyrightText: 2026 The svf Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace svf {

// Base for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Precondition on a numeric argument failed (out-of-range coordinate,
// empty reduction, degenerate vector). CLI exit code 3.
class DomainError : public Error {
public:
    using Error::Error;
};

// Input data is malformed, missing, or inconsistent. CLI exit code 2.
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace svf
