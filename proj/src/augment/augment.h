// Copyright (c) 2026 The meshstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "core/exec.h"
#include "core/image.h"
#include "core/vec3.h"

namespace meshstyle {

class Rng;

struct AugmentConfig {
    int n_aug = 1;                       // augmentation redraws per iteration
    double crop_area_fraction = 0.10;    // local crop keeps this area share
    double perspective_distortion = 0.5;  // max corner shift as share of half-extent
    Vec3 normalization_mean{0.48145466, 0.4578275, 0.40821073};
    Vec3 normalization_std{0.26862954, 0.26130258, 0.27577711};
    std::uint64_t rng_seed = 0;
};

// Record of the resampling stages applied to one image, enough to replay
// them backward. Stages run in order on the forward pass.
struct AugTape {
    struct Stage {
        double H[9];  // output -> input pixel map
        int in_width = 0, in_height = 0;
        int out_width = 0, out_height = 0;
    };
    std::vector<Stage> stages;
};

// Random perspective: each corner of the sampling grid moves outward by
// U[0, distortion * half_extent] per axis, so the content shrinks inward and
// out-of-range samples replicate the border. distortion 0 is the identity.
Image psi_global(const Image& image, const AugmentConfig& cfg, Rng& rng, AugTape& tape,
                 Exec exec = default_exec());

// Side of the local crop square: floor(sqrt(area_fraction) * resolution),
// at least 1.
int local_crop_side(int resolution, double area_fraction);

// Square crop of crop_area_fraction of the area (see local_crop_side) at a
// uniformly drawn center clamped inside the image, resized back to full
// resolution, then psi_global.
Image psi_local(const Image& image, const AugmentConfig& cfg, Rng& rng, AugTape& tape,
                Exec exec = default_exec());

// Replays the tape in reverse, accumulating (+=) into d_in (shaped like the
// original input).
void augment_backward(const AugTape& tape, const Image& d_out, Image& d_in,
                      Exec exec = default_exec());

// (pixel - mean_c) / std_c per channel.
Image clip_normalize(const Image& image, const AugmentConfig& cfg, Exec exec = default_exec());
Image clip_denormalize(const Image& image, const AugmentConfig& cfg,
                       Exec exec = default_exec());
// d_in += d_out / std_c.
void clip_normalize_backward(const Image& d_out, const AugmentConfig& cfg, Image& d_in,
                             Exec exec = default_exec());

}  // namespace meshstyle
