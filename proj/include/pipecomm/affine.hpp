#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "pipecomm/errors.hpp"

namespace pipecomm {

// Row-major 4x4 homogeneous transform mapping voxel indices to world mm.
// The last row is always (0,0,0,1).
struct Affine {
    std::array<double, 16> m{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};

    double& at(int r, int c) { return m[std::size_t(r) * 4 + std::size_t(c)]; }
    double at(int r, int c) const { return m[std::size_t(r) * 4 + std::size_t(c)]; }

    static Affine identity() { return Affine{}; }

    static Affine scaling(double sx, double sy, double sz) {
        Affine a;
        a.at(0, 0) = sx;
        a.at(1, 1) = sy;
        a.at(2, 2) = sz;
        return a;
    }

    static Affine translation(double tx, double ty, double tz) {
        Affine a;
        a.at(0, 3) = tx;
        a.at(1, 3) = ty;
        a.at(2, 3) = tz;
        return a;
    }

    // Transform a voxel coordinate (homogeneous w = 1).
    std::array<double, 3> apply(double x, double y, double z) const {
        return {at(0, 0) * x + at(0, 1) * y + at(0, 2) * z + at(0, 3),
                at(1, 0) * x + at(1, 1) * y + at(1, 2) * z + at(1, 3),
                at(2, 0) * x + at(2, 1) * y + at(2, 2) * z + at(2, 3)};
    }

    Affine compose(const Affine& rhs) const {
        Affine out;
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) {
                double s = 0;
                for (int k = 0; k < 4; ++k) s += at(r, k) * rhs.at(k, c);
                out.at(r, c) = s;
            }
        return out;
    }

    // Inverse of [A t; 0 1] via the adjugate of the upper-left 3x3.
    // Throws singular_affine when |det A| is numerically zero.
    Affine inverse() const;

    bool approx_equal(const Affine& rhs, double tol = 1e-6) const {
        for (std::size_t i = 0; i < 16; ++i)
            if (std::fabs(m[i] - rhs.m[i]) > tol) return false;
        return true;
    }

    bool operator==(const Affine& rhs) const = default;
};

inline Affine Affine::inverse() const {
    const double a = at(0, 0), b = at(0, 1), c = at(0, 2);
    const double d = at(1, 0), e = at(1, 1), f = at(1, 2);
    const double g = at(2, 0), h = at(2, 1), i = at(2, 2);
    const double det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
    if (std::fabs(det) < 1e-12)
        throw Error(Errc::singular_affine, "affine upper-left 3x3 is singular");
    const double inv = 1.0 / det;
    Affine r;
    r.at(0, 0) = (e * i - f * h) * inv;
    r.at(0, 1) = (c * h - b * i) * inv;
    r.at(0, 2) = (b * f - c * e) * inv;
    r.at(1, 0) = (f * g - d * i) * inv;
    r.at(1, 1) = (a * i - c * g) * inv;
    r.at(1, 2) = (c * d - a * f) * inv;
    r.at(2, 0) = (d * h - e * g) * inv;
    r.at(2, 1) = (b * g - a * h) * inv;
    r.at(2, 2) = (a * e - b * d) * inv;
    // translation part: -A^{-1} t
    const double tx = at(0, 3), ty = at(1, 3), tz = at(2, 3);
    r.at(0, 3) = -(r.at(0, 0) * tx + r.at(0, 1) * ty + r.at(0, 2) * tz);
    r.at(1, 3) = -(r.at(1, 0) * tx + r.at(1, 1) * ty + r.at(1, 2) * tz);
    r.at(2, 3) = -(r.at(2, 0) * tx + r.at(2, 1) * ty + r.at(2, 2) * tz);
    return r;
}

} // namespace pipecomm
