// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "core/image.h"

namespace meshstyle {

// Joint text/image embedding space, 512 dimensions. Similarity is cosine
// only, so embedding scale carries no meaning.
using Embedding = std::vector<double>;

inline constexpr int kEmbedDim = 512;

double cosine_sim(const Embedding& a, const Embedding& b);

// Forward embedding plus the vector-Jacobian product against the input
// pixels. `backward` accumulates (+=) into d_pixels, which must match the
// embedded image's shape.
struct EmbedResult {
    Embedding embedding;
    std::function<void(const Embedding& d_embedding, Image& d_pixels)> backward;
};

// Image/text encoder abstraction. Images arrive already clip-normalized.
// Implementations are stateless after construction and safe for concurrent
// calls. Constructors perform capability discovery and throw
// CapabilityError when the backend cannot run; there is no silent fallback.
class Embedder {
public:
    virtual ~Embedder() = default;

    // Recorded in run manifests.
    virtual std::string identity() const = 0;

    virtual Embedding embed_text(const std::string& text) = 0;
    virtual Embedding embed_image(const Image& normalized) = 0;
    virtual EmbedResult embed_image_grad(const Image& normalized) = 0;
};

}  // namespace meshstyle
