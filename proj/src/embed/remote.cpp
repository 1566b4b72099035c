// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "embed/remote.h"

#include <utility>

#include "httplib.h"
#include "json.hpp"

#include "core/errors.h"

namespace meshstyle {

using nlohmann::json;

struct RemoteEmbedder::Impl {
    std::string base_url;
    std::string model;
    httplib::Client client;
    // httplib clients are not safe for concurrent requests on one connection.
    std::mutex mu;

    explicit Impl(const std::string& url) : base_url(url), client(url) {
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(300, 0);
        client.set_write_timeout(300, 0);
    }

    json post(const std::string& path, const json& body) {
        std::lock_guard<std::mutex> lock(mu);
        auto res = client.Post(path, body.dump(), "application/json");
        if (!res) {
            throw IoError("embedding service request failed: " + base_url + path);
        }
        if (res->status != 200) {
            throw IoError("embedding service error " + std::to_string(res->status) +
                          " at " + path + ": " + res->body);
        }
        return json::parse(res->body);
    }
};

namespace {

Embedding parse_embedding(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array()) {
        throw IoError(std::string("embedding service response missing '") + key + "'");
    }
    Embedding e = j[key].get<Embedding>();
    if (static_cast<int>(e.size()) != kEmbedDim) {
        throw IoError("embedding service returned wrong dimension: " +
                      std::to_string(e.size()));
    }
    return e;
}

json image_body(const Image& img, bool want_grad) {
    json body;
    body["width"] = img.width;
    body["height"] = img.height;
    body["pixels"] = img.data;
    body["want_grad"] = want_grad;
    return body;
}

}  // namespace

RemoteEmbedder::RemoteEmbedder(const std::string& base_url)
    : impl_(std::make_unique<Impl>(base_url)) {
    auto res = impl_->client.Get("/health");
    if (!res || res->status != 200) {
        throw CapabilityError("embedding service unreachable at " + base_url +
                              " (start tools/clip_server.py or use the mock embedder)");
    }
    json health;
    try {
        health = json::parse(res->body);
    } catch (const json::exception&) {
        throw CapabilityError("embedding service /health returned malformed JSON");
    }
    const int dim = health.value("dim", -1);
    if (dim != kEmbedDim) {
        throw CapabilityError("embedding service dimension " + std::to_string(dim) +
                              " does not match required " + std::to_string(kEmbedDim));
    }
    impl_->model = health.value("model", "unknown");
}

RemoteEmbedder::~RemoteEmbedder() = default;

std::string RemoteEmbedder::identity() const {
    return "remote/" + impl_->model;
}

Embedding RemoteEmbedder::embed_text(const std::string& text) {
    if (text.empty()) {
        throw ArgumentError("embed_text: empty text");
    }
    json body;
    body["text"] = text;
    return parse_embedding(impl_->post("/embed_text", body), "embedding");
}

Embedding RemoteEmbedder::embed_image(const Image& normalized) {
    json reply = impl_->post("/embed_image", image_body(normalized, false));
    return parse_embedding(reply, "embedding");
}

EmbedResult RemoteEmbedder::embed_image_grad(const Image& normalized) {
    json reply = impl_->post("/embed_image", image_body(normalized, true));
    EmbedResult out;
    out.embedding = parse_embedding(reply, "embedding");
    if (!reply.contains("handle")) {
        throw IoError("embedding service did not return a gradient handle");
    }
    const std::string handle = reply["handle"].get<std::string>();
    const int width = normalized.width;
    const int height = normalized.height;
    Impl* impl = impl_.get();
    out.backward = [impl, handle, width, height](const Embedding& d_embedding,
                                                 Image& d_pixels) {
        if (static_cast<int>(d_embedding.size()) != kEmbedDim) {
            throw DimensionError("image backward: bad d_embedding size");
        }
        if (d_pixels.width != width || d_pixels.height != height) {
            throw DimensionError("image backward: d_pixels shape mismatch");
        }
        json body;
        body["handle"] = handle;
        body["d_embedding"] = d_embedding;
        json reply = impl->post("/image_backward", body);
        if (!reply.contains("d_pixels") || !reply["d_pixels"].is_array()) {
            throw IoError("embedding service response missing 'd_pixels'");
        }
        std::vector<double> dpix = reply["d_pixels"].get<std::vector<double>>();
        if (dpix.size() != d_pixels.data.size()) {
            throw IoError("embedding service returned wrong d_pixels size");
        }
        for (size_t i = 0; i < dpix.size(); ++i) {
            d_pixels.data[i] += dpix[i];
        }
    };
    return out;
}

}  // namespace meshstyle
