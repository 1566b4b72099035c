// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "embed/mock.h"

#include <cctype>
#include <cmath>

#include "core/errors.h"
#include "core/hash.h"
#include "core/rng.h"

namespace meshstyle {

namespace {

constexpr int kPoolGrid = 16;
constexpr int kFeatureDim = kPoolGrid * kPoolGrid * 3;  // 768

void check_image(const Image& image) {
    if (image.width != image.height) {
        throw DimensionError("mock embedder: square image required");
    }
    if (image.width < kPoolGrid) {
        throw DimensionError("mock embedder: resolution must be at least 16");
    }
}

// Adaptive bin edges: cell i covers [i*n/16, (i+1)*n/16). Every cell is
// nonempty for n >= 16, and any side length works (crops are 70px at the
// default resolution).
inline int bin_edge(int i, int n) { return (i * n) / kPoolGrid; }

// Image adaptively average-pooled to 16x16, flattened row-major HWC (exactly
// the Image layout).
std::vector<double> pooled_features(const Image& image) {
    const int n = image.width;
    std::vector<double> pooled(kFeatureDim, 0.0);
    for (int oy = 0; oy < kPoolGrid; ++oy) {
        const int y0 = bin_edge(oy, n), y1 = bin_edge(oy + 1, n);
        for (int ox = 0; ox < kPoolGrid; ++ox) {
            const int x0 = bin_edge(ox, n), x1 = bin_edge(ox + 1, n);
            const double inv = 1.0 / (static_cast<double>(y1 - y0) * (x1 - x0));
            for (int c = 0; c < 3; ++c) {
                double acc = 0.0;
                for (int y = y0; y < y1; ++y) {
                    for (int x = x0; x < x1; ++x) {
                        acc += image.at(y, x, c);
                    }
                }
                pooled[static_cast<size_t>((oy * kPoolGrid + ox) * 3 + c)] = acc * inv;
            }
        }
    }
    return pooled;
}

void pooled_backward(const std::vector<double>& d_pooled, Image& d_pixels) {
    const int n = d_pixels.width;
    for (int oy = 0; oy < kPoolGrid; ++oy) {
        const int y0 = bin_edge(oy, n), y1 = bin_edge(oy + 1, n);
        for (int ox = 0; ox < kPoolGrid; ++ox) {
            const int x0 = bin_edge(ox, n), x1 = bin_edge(ox + 1, n);
            const double inv = 1.0 / (static_cast<double>(y1 - y0) * (x1 - x0));
            for (int c = 0; c < 3; ++c) {
                const double g = d_pooled[static_cast<size_t>((oy * kPoolGrid + ox) * 3 + c)] * inv;
                for (int y = y0; y < y1; ++y) {
                    for (int x = x0; x < x1; ++x) {
                        d_pixels.at(y, x, c) += g;
                    }
                }
            }
        }
    }
}

Embedding project_normalized(const Matrix& projection, const std::vector<double>& z,
                             Embedding* raw_out, double* norm_out) {
    Embedding y(kEmbedDim, 0.0);
    for (int i = 0; i < kEmbedDim; ++i) {
        const double* row = projection.row(i);
        double acc = 0.0;
        for (int j = 0; j < kFeatureDim; ++j) {
            acc += row[j] * z[static_cast<size_t>(j)];
        }
        y[static_cast<size_t>(i)] = acc;
    }
    double nrm = 0.0;
    for (double v : y) {
        nrm += v * v;
    }
    nrm = std::sqrt(nrm);
    if (nrm < 1e-30) {
        throw NumericsError("mock embedder: zero projection, cannot normalize");
    }
    Embedding e(kEmbedDim);
    for (int i = 0; i < kEmbedDim; ++i) {
        e[static_cast<size_t>(i)] = y[static_cast<size_t>(i)] / nrm;
    }
    if (raw_out) {
        *raw_out = std::move(y);
    }
    if (norm_out) {
        *norm_out = nrm;
    }
    return e;
}

}  // namespace

MockEmbedder::MockEmbedder(std::uint64_t seed) : seed_(seed) {
    Rng rng = Rng::stream(seed, "mock_projection");
    projection_ = Matrix(kEmbedDim, kFeatureDim);
    for (double& v : projection_.data) {
        v = rng.normal();
    }
}

std::string MockEmbedder::identity() const {
    return "mock-pool16-proj512/seed=" + std::to_string(seed_);
}

Embedding MockEmbedder::embed_text(const std::string& text) {
    std::vector<double> bins(kFeatureDim, 0.0);
    bool any = false;
    size_t i = 0;
    while (i < text.size()) {
        // Tokens are maximal runs of letters/digits, lowercased; word order
        // is deliberately discarded.
        while (i < text.size() && !std::isalnum(static_cast<unsigned char>(text[i]))) {
            ++i;
        }
        Fnv1a h;
        bool in_token = false;
        while (i < text.size() && std::isalnum(static_cast<unsigned char>(text[i]))) {
            const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
            h.update(&c, 1);
            in_token = true;
            ++i;
        }
        if (in_token) {
            bins[h.digest() % kFeatureDim] += 1.0;
            any = true;
        }
    }
    if (!any) {
        throw ArgumentError("embed_text: no tokens in input");
    }
    return project_normalized(projection_, bins, nullptr, nullptr);
}

Embedding MockEmbedder::embed_image(const Image& normalized) {
    check_image(normalized);
    return project_normalized(projection_, pooled_features(normalized), nullptr, nullptr);
}

EmbedResult MockEmbedder::embed_image_grad(const Image& normalized) {
    check_image(normalized);
    EmbedResult result;
    Embedding raw;
    double raw_norm = 0.0;
    result.embedding =
        project_normalized(projection_, pooled_features(normalized), &raw, &raw_norm);

    const int res = normalized.width;
    const Matrix* projection = &projection_;
    const Embedding e = result.embedding;
    result.backward = [projection, e, raw_norm, res](const Embedding& d_embedding,
                                                     Image& d_pixels) {
        if (static_cast<int>(d_embedding.size()) != kEmbedDim) {
            throw DimensionError("mock embedder backward: gradient dimension mismatch");
        }
        if (d_pixels.width != res || d_pixels.height != res) {
            throw DimensionError("mock embedder backward: pixel gradient shape mismatch");
        }
        // L2-normalize backward: d_y = (d_e - e (e . d_e)) / |y|.
        double e_dot = 0.0;
        for (int i = 0; i < kEmbedDim; ++i) {
            e_dot += e[static_cast<size_t>(i)] * d_embedding[static_cast<size_t>(i)];
        }
        std::vector<double> d_y(kEmbedDim);
        for (int i = 0; i < kEmbedDim; ++i) {
            d_y[static_cast<size_t>(i)] =
                (d_embedding[static_cast<size_t>(i)] - e[static_cast<size_t>(i)] * e_dot) /
                raw_norm;
        }
        // d_z = P^T d_y.
        std::vector<double> d_pooled(kFeatureDim, 0.0);
        for (int i = 0; i < kEmbedDim; ++i) {
            const double* row = projection->row(i);
            const double g = d_y[static_cast<size_t>(i)];
            if (g == 0.0) {
                continue;
            }
            for (int j = 0; j < kFeatureDim; ++j) {
                d_pooled[static_cast<size_t>(j)] += row[j] * g;
            }
        }
        pooled_backward(d_pooled, d_pixels);
    };
    return result;
}

}  // namespace meshstyle
