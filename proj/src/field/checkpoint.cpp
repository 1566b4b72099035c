// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#include "field/checkpoint.h"

#include <cstring>
#include <fstream>

#include "core/errors.h"

namespace meshstyle {

namespace {

constexpr char kMagic[8] = {'M', 'S', 'C', 'K', 'P', 'T', '0', '1'};

struct Writer {
    std::ofstream out;

    explicit Writer(const std::string& path) : out(path, std::ios::binary) {
        if (!out) {
            throw IoError("cannot write checkpoint: " + path);
        }
    }
    template <typename T>
    void value(const T& v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
    void doubles(const std::vector<double>& v) {
        value<std::uint64_t>(v.size());
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    }
    void str(const std::string& s) {
        value<std::uint16_t>(static_cast<std::uint16_t>(s.size()));
        out.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
};

struct Reader {
    std::ifstream in;
    std::string path;

    explicit Reader(const std::string& p) : in(p, std::ios::binary), path(p) {
        if (!in) {
            throw IoError("cannot open checkpoint: " + p);
        }
    }
    template <typename T>
    T value() {
        T v{};
        in.read(reinterpret_cast<char*>(&v), sizeof(T));
        if (!in) {
            throw FormatError("truncated checkpoint: " + path);
        }
        return v;
    }
    std::vector<double> doubles() {
        const auto n = value<std::uint64_t>();
        if (n > (1ULL << 32)) {
            throw FormatError("implausible tensor size in checkpoint: " + path);
        }
        std::vector<double> v(n);
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(n * sizeof(double)));
        if (!in) {
            throw FormatError("truncated checkpoint: " + path);
        }
        return v;
    }
    std::string str() {
        const auto n = value<std::uint16_t>();
        std::string s(n, '\0');
        in.read(s.data(), n);
        if (!in) {
            throw FormatError("truncated checkpoint: " + path);
        }
        return s;
    }
};

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    Writer w(path);
    w.out.write(kMagic, sizeof(kMagic));
    w.value<std::uint32_t>(1);  // format version

    const EncodingConfig& e = ckpt.cfg.encoding;
    w.value<std::uint64_t>(e.rng_seed);
    w.value<std::int32_t>(e.k);
    w.value<double>(e.sigma_b);
    w.value<std::uint8_t>(e.symmetry_x ? 1 : 0);
    w.value<std::uint8_t>(e.symmetry_y ? 1 : 0);
    w.value<std::uint8_t>(e.symmetry_z ? 1 : 0);
    w.value<std::uint8_t>(ckpt.cfg.use_encoding ? 1 : 0);
    w.value<std::uint8_t>(ckpt.cfg.direct ? 1 : 0);
    w.value<std::int32_t>(ckpt.cfg.direct_n);
    w.value<std::uint8_t>(static_cast<std::uint8_t>(ckpt.cfg.mode));
    w.value<std::uint64_t>(ckpt.mesh_hash);
    w.value<std::int32_t>(ckpt.subdivide_level);
    w.value<std::uint64_t>(ckpt.run_seed);
    w.value<std::int32_t>(ckpt.iteration);

    w.value<std::int32_t>(ckpt.B.rows);
    w.value<std::int32_t>(ckpt.B.cols);
    w.doubles(ckpt.B.data);

    std::uint32_t count = 0;
    visit_field_tensors(const_cast<FieldTensors&>(ckpt.tensors),
                        [&](const std::string&, ParamGroup, std::vector<double>&) { ++count; });
    w.value<std::uint32_t>(count);
    visit_field_tensors(const_cast<FieldTensors&>(ckpt.tensors),
                        [&](const std::string& name, ParamGroup, std::vector<double>& v) {
                            w.str(name);
                            w.doubles(v);
                        });
    w.out.flush();
    if (!w.out) {
        throw IoError("checkpoint write failed: " + path);
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    Reader r(path);
    char magic[sizeof(kMagic)];
    r.in.read(magic, sizeof(magic));
    if (!r.in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw FormatError("not a checkpoint file: " + path);
    }
    const auto version = r.value<std::uint32_t>();
    if (version != 1) {
        throw FormatError("unsupported checkpoint version " + std::to_string(version) + ": " +
                          path);
    }

    Checkpoint c;
    EncodingConfig& e = c.cfg.encoding;
    e.rng_seed = r.value<std::uint64_t>();
    e.k = r.value<std::int32_t>();
    e.sigma_b = r.value<double>();
    e.symmetry_x = r.value<std::uint8_t>() != 0;
    e.symmetry_y = r.value<std::uint8_t>() != 0;
    e.symmetry_z = r.value<std::uint8_t>() != 0;
    c.cfg.use_encoding = r.value<std::uint8_t>() != 0;
    c.cfg.direct = r.value<std::uint8_t>() != 0;
    c.cfg.direct_n = r.value<std::int32_t>();
    c.cfg.mode = static_cast<StyleMode>(r.value<std::uint8_t>());
    c.mesh_hash = r.value<std::uint64_t>();
    c.subdivide_level = r.value<std::int32_t>();
    c.run_seed = r.value<std::uint64_t>();
    c.iteration = r.value<std::int32_t>();

    c.B.rows = r.value<std::int32_t>();
    c.B.cols = r.value<std::int32_t>();
    c.B.data = r.doubles();
    if (c.B.data.size() != static_cast<size_t>(c.B.rows) * static_cast<size_t>(c.B.cols)) {
        throw FormatError("checkpoint B matrix shape mismatch: " + path);
    }

    // Reconstruct the tensor shapes from a fresh field of the same config,
    // then overwrite the values; names guard against layout drift.
    StyleField fresh = StyleField::create(c.cfg);
    c.tensors = fresh.tensors();
    const auto tensor_count = r.value<std::uint32_t>();
    std::uint32_t seen = 0;
    visit_field_tensors(c.tensors, [&](const std::string& name, ParamGroup,
                                       std::vector<double>& v) {
        const std::string stored_name = r.str();
        std::vector<double> values = r.doubles();
        if (stored_name != name || values.size() != v.size()) {
            throw FormatError("checkpoint tensor mismatch at '" + stored_name + "': " + path);
        }
        v = std::move(values);
        ++seen;
    });
    if (seen != tensor_count) {
        throw FormatError("checkpoint tensor count mismatch: " + path);
    }
    return c;
}

Checkpoint checkpoint_from_field(const StyleField& field, std::uint64_t mesh_hash,
                                 int subdivide_level, std::uint64_t run_seed, int iteration) {
    Checkpoint c;
    c.cfg = field.config();
    c.B = field.encoding_matrix();
    c.tensors = field.tensors();
    c.mesh_hash = mesh_hash;
    c.subdivide_level = subdivide_level;
    c.run_seed = run_seed;
    c.iteration = iteration;
    return c;
}

StyleField field_from_checkpoint(const Checkpoint& ckpt) {
    StyleField f;
    f.set_state(ckpt.cfg, ckpt.B, ckpt.tensors);
    return f;
}

}  // namespace meshstyle
