#pragma once

#include <cstdint>

#include "reidfuse/store.hpp"

namespace reidfuse {

/// Synthetic embedding generator with a controllable per-camera shift.
///
/// Every image is  center[person] + offset[camera] + noise, where
///   - center components are i.i.d. N(0, identity_spread^2);
///   - offsets point along mutually orthogonal random unit directions and
///     have norm camera_bias_scale * sqrt(dim), i.e. their per-component RMS
///     is camera_bias_scale;
///   - noise components are i.i.d. N(0, noise_scale^2).
///
/// The first half of the identities (rounded down) go to the train set with
/// all their images. For the remaining identities, the first image of every
/// (identity, camera) pair becomes a query and the rest go to the gallery,
/// so each query has same-identity gallery images on every other camera.
struct SynthConfig {
    int num_identities = 50;
    int cams = 4;
    int images_per_id_per_cam = 3;
    int dim = 64;
    double identity_spread = 1.0;
    double camera_bias_scale = 1.5;
    double noise_scale = 0.3;
    std::uint64_t seed = 0;

    /// Throws UsageError when the configuration cannot satisfy the
    /// cross-camera guarantee or has out-of-range values.
    void validate() const;
};

struct SynthData {
    FeatureSet train;
    FeatureSet queries;
    FeatureSet gallery;
};

SynthData generate(const SynthConfig& config);

}  // namespace reidfuse
