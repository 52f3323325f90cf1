#pragma once

#include <cstdint>
#include <vector>

#include "pipecomm/volume.hpp"

namespace pipecomm {

// The common output grid every map is brought onto before comparison.
struct TargetGrid {
    std::array<int, 3> dims{1, 1, 1};
    Affine affine;

    static TargetGrid like(const Volume& v) { return TargetGrid{v.dims, v.affine}; }
    bool operator==(const TargetGrid&) const = default;
};

// In-mask voxel values in x-fastest order. mask_hash ties the vector to the
// exact mask it was extracted with; correlating vectors from different masks
// is meaningless and is rejected downstream.
struct MaskedVector {
    std::vector<float> values;
    std::uint64_t mask_hash = 0;

    std::size_t n_voxels() const { return values.size(); }
};

// Trilinear interpolation evaluated in source voxel space; samples outside
// the source voxel hull are 0.
Volume resample_continuous(const Volume& v, const TargetGrid& g);

// Nearest source voxel center, ties toward the lower index; out of bounds 0.
Volume resample_nearest(const Volume& v, const TargetGrid& g);

// Voxelwise AND after binarizing each mask at > 0.5. An empty result is
// legal but gets a warning; downstream apply_mask rejects it.
Volume intersect_masks(const std::vector<Volume>& masks);

// FNV-1a over dims and the binarized voxel pattern.
std::uint64_t mask_hash(const Volume& mask);

MaskedVector apply_mask(const Volume& v, const Volume& mask);

// Inverse of apply_mask: in-mask voxels take the vector values, the rest 0.
Volume scatter_to_volume(const MaskedVector& vec, const Volume& mask);

} // namespace pipecomm
