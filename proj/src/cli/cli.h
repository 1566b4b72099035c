// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

namespace meshstyle {

// Entry point behind the meshstyle binary. Commands: stylize, select-anchor,
// morph, subdivide, score, export-snapshots.
//
// Exit codes: 0 success, 2 usage (bad flags, missing target, unknown config
// key), 3 missing capability (real embedder unreachable), 4 runtime failure.
// Artifact paths go to stdout, diagnostics to stderr.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args);  // args without argv[0]

}  // namespace meshstyle
