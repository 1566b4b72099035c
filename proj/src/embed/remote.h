// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <mutex>
#include <string>

#include "embed/embedder.h"

namespace meshstyle {

// Adapter for an out-of-process embedding service speaking a small JSON/HTTP
// protocol (see tools/clip_server.py):
//
//   GET  /health          -> {"model": str, "dim": int}
//   POST /embed_text      {"text"} -> {"embedding"}
//   POST /embed_image     {"width","height","pixels","want_grad"}
//                         -> {"embedding", "handle"?}
//   POST /image_backward  {"handle","d_embedding"} -> {"d_pixels"}
//
// Pixels are row-major interleaved RGB doubles, already normalized for the
// model. The server keeps forward activations alive under `handle` until the
// matching /image_backward call retires them.
//
// Construction probes /health and throws CapabilityError if the service is
// unreachable or serves a different embedding dimension. Later transport
// failures surface as IoError.
class RemoteEmbedder final : public Embedder {
public:
    explicit RemoteEmbedder(const std::string& base_url);
    ~RemoteEmbedder() override;

    std::string identity() const override;
    Embedding embed_text(const std::string& text) override;
    Embedding embed_image(const Image& normalized) override;
    // The returned backward closure references this embedder; it must not be
    // invoked after the embedder is destroyed.
    EmbedResult embed_image_grad(const Image& normalized) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace meshstyle
