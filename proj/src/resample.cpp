#include "pipecomm/resample.hpp"

#include <cmath>

#include "pipecomm/errors.hpp"
#include "pipecomm/hash.hpp"
#include "pipecomm/kernels.hpp"
#include "pipecomm/log.hpp"

namespace pipecomm {

namespace {

// Maps a target voxel index to source voxel coordinates. One inversion per
// call site keeps the per-voxel arithmetic identical across runs.
Affine source_from_target(const Volume& v, const TargetGrid& g) {
    return v.affine.inverse().compose(g.affine);
}

void check_same_grid(const Volume& a, const Volume& b) {
    if (a.dims != b.dims || !a.affine.approx_equal(b.affine))
        throw Error(Errc::grid_mismatch, "volumes are not on the same grid");
}

} // namespace

Volume resample_continuous(const Volume& v, const TargetGrid& g) {
    const Affine m = source_from_target(v, g);
    Volume out;
    out.dims = g.dims;
    out.affine = g.affine;
    out.data.assign(out.nvox(), 0.0f);

    const int nx = v.dims[0], ny = v.dims[1], nz = v.dims[2];
    std::size_t t = 0;
    for (int k = 0; k < g.dims[2]; ++k)
        for (int j = 0; j < g.dims[1]; ++j)
            for (int i = 0; i < g.dims[0]; ++i, ++t) {
                const auto s = m.apply(i, j, k);
                if (s[0] < 0.0 || s[0] > nx - 1 || s[1] < 0.0 || s[1] > ny - 1 ||
                    s[2] < 0.0 || s[2] > nz - 1)
                    continue; // outside the voxel hull
                int i0, j0, k0;
                double fx, fy, fz;
                auto cell = [](double sc, int n, int& lo, double& f) {
                    if (n == 1) {
                        lo = 0;
                        f = 0.0;
                        return;
                    }
                    lo = int(std::floor(sc));
                    if (lo > n - 2) lo = n - 2;
                    f = sc - lo;
                };
                cell(s[0], nx, i0, fx);
                cell(s[1], ny, j0, fy);
                cell(s[2], nz, k0, fz);
                const int i1 = nx == 1 ? i0 : i0 + 1;
                const int j1 = ny == 1 ? j0 : j0 + 1;
                const int k1 = nz == 1 ? k0 : k0 + 1;
                const double c000 = v.at(i0, j0, k0), c100 = v.at(i1, j0, k0);
                const double c010 = v.at(i0, j1, k0), c110 = v.at(i1, j1, k0);
                const double c001 = v.at(i0, j0, k1), c101 = v.at(i1, j0, k1);
                const double c011 = v.at(i0, j1, k1), c111 = v.at(i1, j1, k1);
                const double c00 = c000 + fx * (c100 - c000);
                const double c10 = c010 + fx * (c110 - c010);
                const double c01 = c001 + fx * (c101 - c001);
                const double c11 = c011 + fx * (c111 - c011);
                const double c0 = c00 + fy * (c10 - c00);
                const double c1 = c01 + fy * (c11 - c01);
                out.data[t] = float(c0 + fz * (c1 - c0));
            }
    return out;
}

Volume resample_nearest(const Volume& v, const TargetGrid& g) {
    const Affine m = source_from_target(v, g);
    Volume out;
    out.dims = g.dims;
    out.affine = g.affine;
    out.data.assign(out.nvox(), 0.0f);

    std::size_t t = 0;
    for (int k = 0; k < g.dims[2]; ++k)
        for (int j = 0; j < g.dims[1]; ++j)
            for (int i = 0; i < g.dims[0]; ++i, ++t) {
                const auto s = m.apply(i, j, k);
                // ceil(s - 0.5) rounds halfway cases toward the lower index
                const int si = int(std::ceil(s[0] - 0.5));
                const int sj = int(std::ceil(s[1] - 0.5));
                const int sk = int(std::ceil(s[2] - 0.5));
                if (si < 0 || si >= v.dims[0] || sj < 0 || sj >= v.dims[1] || sk < 0 ||
                    sk >= v.dims[2])
                    continue;
                out.data[t] = v.at(si, sj, sk);
            }
    return out;
}

std::uint64_t mask_hash(const Volume& mask) {
    std::uint64_t h = kFnvBasis;
    for (int d : mask.dims)
        for (int shift = 0; shift < 32; shift += 8)
            h = fnv1a64(std::uint8_t((unsigned(d) >> shift) & 0xff), h);
    for (float x : mask.data) h = fnv1a64(x > 0.5f ? 1 : 0, h);
    return h;
}

Volume intersect_masks(const std::vector<Volume>& masks) {
    if (masks.empty()) throw Error(Errc::empty_mask_list, "no masks to intersect");
    Volume out = masks[0];
    for (auto& x : out.data) x = x > 0.5f ? 1.0f : 0.0f;
    std::vector<float> bin;
    for (std::size_t m = 1; m < masks.size(); ++m) {
        check_same_grid(out, masks[m]);
        bin = masks[m].data;
        for (auto& x : bin) x = x > 0.5f ? 1.0f : 0.0f;
        kernels::min_inplace(out.data, bin);
    }
    if (kernels::count_above(out.data, 0.5f) == 0)
        warn("mask intersection is empty (" + std::string(errc_name(Errc::empty_intersection)) + ")");
    return out;
}

MaskedVector apply_mask(const Volume& v, const Volume& mask) {
    check_same_grid(v, mask);
    MaskedVector out;
    out.mask_hash = mask_hash(mask);
    const std::size_t n = kernels::count_above(mask.data, 0.5f);
    if (n == 0) throw Error(Errc::empty_intersection, "mask selects no voxels");
    out.values.reserve(n);
    for (std::size_t i = 0; i < v.data.size(); ++i)
        if (mask.data[i] > 0.5f) out.values.push_back(v.data[i]);
    return out;
}

Volume scatter_to_volume(const MaskedVector& vec, const Volume& mask) {
    if (vec.mask_hash != mask_hash(mask) ||
        vec.n_voxels() != kernels::count_above(mask.data, 0.5f))
        throw Error(Errc::mask_mismatch, "vector does not belong to this mask");
    Volume out;
    out.dims = mask.dims;
    out.affine = mask.affine;
    out.data.assign(mask.data.size(), 0.0f);
    std::size_t k = 0;
    for (std::size_t i = 0; i < mask.data.size(); ++i)
        if (mask.data[i] > 0.5f) out.data[i] = vec.values[k++];
    return out;
}

} // namespace pipecomm
