// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace meshstyle {

// Error taxonomy mirrored by the CLI exit codes: usage problems exit 2,
// missing capabilities (e.g. no embedding backend) exit 3, everything
// else that goes wrong at runtime exits 4.

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : Error {
    using Error::Error;
};

// Malformed input data (bad OBJ indices, truncated checkpoint, ...).
struct FormatError : Error {
    using Error::Error;
};

// Mismatched sizes between values that must correspond entry-by-entry.
struct DimensionError : Error {
    using Error::Error;
};

struct ArgumentError : Error {
    using Error::Error;
};

// A requested backend/resource is not available in this process.
struct CapabilityError : Error {
    using Error::Error;
};

// Non-finite values or other numeric breakdown during optimization.
struct NumericsError : Error {
    using Error::Error;
};

}  // namespace meshstyle
