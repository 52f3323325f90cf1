#pragma once

// 3-D scalar volumes and the on-disk format: a deliberately narrow NIfTI-1
// subset. Single-file "n+1" images only, 3-D, int16/float32/float64, sform
// affine required. Anything else is rejected so that reads are bit-exactly
// reproducible.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "pipecomm/affine.hpp"

namespace pipecomm {

struct Volume {
    std::array<int, 3> dims{0, 0, 0}; // nx, ny, nz
    Affine affine;                    // voxel index -> world mm
    std::vector<float> data;          // x-fastest ordering

    std::size_t nvox() const {
        return std::size_t(dims[0]) * std::size_t(dims[1]) * std::size_t(dims[2]);
    }

    std::size_t index(int i, int j, int k) const {
        return std::size_t(i) +
               std::size_t(dims[0]) * (std::size_t(j) + std::size_t(dims[1]) * std::size_t(k));
    }

    float at(int i, int j, int k) const { return data[index(i, j, k)]; }
    float& at(int i, int j, int k) { return data[index(i, j, k)]; }

    bool same_grid(const Volume& o) const {
        return dims == o.dims && affine.approx_equal(o.affine);
    }

    static Volume filled(std::array<int, 3> dims, const Affine& affine, float value);
};

// What to do with NaN voxels found in a file. Statistic maps routinely carry
// NaN outside the brain; masks and atlases must not.
enum class NanPolicy {
    zero_fill, // replace with 0, report a warning with the count
    reject,    // raise non_finite_data
};

// Reads the NIfTI-1 subset. Byte order is auto-detected from the header size
// field; scl_slope/scl_inter are applied when scl_slope != 0. Infinite values
// are always rejected; NaN handling follows `policy`.
Volume read_volume(const std::string& path, NanPolicy policy = NanPolicy::zero_fill);

// Mask of voxels that hold a finite value in the file: 1 finite, 0 NaN/Inf.
// Used to derive per-map brain masks for mask=auto.
Volume read_finite_mask(const std::string& path);

// Writes single-file float32 NIfTI-1: sform from the affine, qform unset,
// scl_slope=1, scl_inter=0, little-endian, data at offset 352.
void write_volume(const Volume& v, const std::string& path);

} // namespace pipecomm
