#pragma once

#include <cstdint>
#include <string>

#include "lmc/types.hpp"

namespace lmc {

enum class FieldKind { translation, rotation_scale, affine, piecewise_affine };

FieldKind field_from_name(const std::string& name);
std::string field_name(FieldKind kind);

// Fully determines a labeled synthetic scene (see generate_scene). The draw
// order of the underlying xoshiro256++ stream is part of the format, so the
// same spec always reproduces the same scene bit-exactly.
struct SceneSpec {
    int n_points = 0;
    double outlier_ratio = 0.0;  // in [0, 1)
    FieldKind field_kind = FieldKind::translation;
    int regions = 2;  // piecewise_affine only, >= 2
    double noise_std = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

// Sources uniform in [-1,1]^2. Inliers map through the smooth field (plus
// optional Gaussian noise); a source is resampled until its target stays in
// [-1,1]^2 (at most 1000 attempts). Outliers get independent uniform targets.
// The outlier count is exactly round(n_points * outlier_ratio), assigned by a
// seeded index shuffle. labels: 1 = inlier, 0 = outlier.
CorrespondenceSet generate_scene(const SceneSpec& spec);

}  // namespace lmc
