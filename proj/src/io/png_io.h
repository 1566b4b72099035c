// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "core/image.h"

namespace meshstyle {

// 8-bit RGB; values clamped from [0,1]. Throws IoError on failure.
void write_png(const std::string& path, const Image& image);

// Any libpng-readable file, converted to 8-bit RGB and scaled to [0,1].
Image read_png(const std::string& path);

}  // namespace meshstyle
