// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

#include "core/matrix.h"
#include "embed/embedder.h"

namespace meshstyle {

// Deterministic, differentiable stand-in for the pretrained encoder so the
// whole pipeline runs and is testable without weights or a GPU. Images are
// average-pooled to 16x16, flattened (768) and projected by a fixed seeded
// Gaussian matrix; text becomes a hashed bag-of-words over the same 768 bins
// and shares the projection, which makes cross-modal similarity meaningful.
// Both outputs are L2-normalized.
class MockEmbedder : public Embedder {
public:
    explicit MockEmbedder(std::uint64_t seed = 1234);

    std::string identity() const override;
    Embedding embed_text(const std::string& text) override;
    Embedding embed_image(const Image& normalized) override;
    EmbedResult embed_image_grad(const Image& normalized) override;

private:
    std::uint64_t seed_;
    Matrix projection_;  // kEmbedDim x 768
};

}  // namespace meshstyle
