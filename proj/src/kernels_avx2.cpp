// AVX2 variants of the voxel-vector kernels. This translation unit is the
// only one compiled with -mavx2 -mfma; callers must check runtime_supported()
// (the dispatcher in kernels.cpp does) before entering any function here.

#if defined(PIPECOMM_HAVE_AVX2)

#include "pipecomm/kernels.hpp"

#include <cassert>
#include <immintrin.h>

namespace pipecomm::kernels::avx2 {

bool runtime_supported() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

namespace {

// Horizontal sum of 4 doubles, fixed lane order.
inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d s = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(s, s);
    return _mm_cvtsd_f64(_mm_add_sd(s, swapped));
}

} // namespace

double reduce_sum(std::span<const float> x) {
    const float* p = x.data();
    std::size_t n = x.size();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 v = _mm256_loadu_ps(p + i);
        acc0 = _mm256_add_pd(acc0, _mm256_cvtps_pd(_mm256_castps256_ps128(v)));
        acc1 = _mm256_add_pd(acc1, _mm256_cvtps_pd(_mm256_extractf128_ps(v, 1)));
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += p[i];
    return acc;
}

double reduce_dot(std::span<const float> x, std::span<const float> y) {
    assert(x.size() == y.size());
    const float* px = x.data();
    const float* py = y.data();
    std::size_t n = x.size();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 vx = _mm256_loadu_ps(px + i);
        __m256 vy = _mm256_loadu_ps(py + i);
        __m256d xl = _mm256_cvtps_pd(_mm256_castps256_ps128(vx));
        __m256d xh = _mm256_cvtps_pd(_mm256_extractf128_ps(vx, 1));
        __m256d yl = _mm256_cvtps_pd(_mm256_castps256_ps128(vy));
        __m256d yh = _mm256_cvtps_pd(_mm256_extractf128_ps(vy, 1));
        acc0 = _mm256_fmadd_pd(xl, yl, acc0);
        acc1 = _mm256_fmadd_pd(xh, yh, acc1);
    }
    double acc = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += double(px[i]) * double(py[i]);
    return acc;
}

CorrSums corr_sums(std::span<const float> x, std::span<const float> y,
                   double mean_x, double mean_y) {
    assert(x.size() == y.size());
    const float* px = x.data();
    const float* py = y.data();
    std::size_t n = x.size();
    __m256d mx = _mm256_set1_pd(mean_x);
    __m256d my = _mm256_set1_pd(mean_y);
    __m256d sxy0 = _mm256_setzero_pd(), sxy1 = _mm256_setzero_pd();
    __m256d sxx0 = _mm256_setzero_pd(), sxx1 = _mm256_setzero_pd();
    __m256d syy0 = _mm256_setzero_pd(), syy1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 vx = _mm256_loadu_ps(px + i);
        __m256 vy = _mm256_loadu_ps(py + i);
        __m256d dxl = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(vx)), mx);
        __m256d dxh = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(vx, 1)), mx);
        __m256d dyl = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(vy)), my);
        __m256d dyh = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(vy, 1)), my);
        sxy0 = _mm256_fmadd_pd(dxl, dyl, sxy0);
        sxy1 = _mm256_fmadd_pd(dxh, dyh, sxy1);
        sxx0 = _mm256_fmadd_pd(dxl, dxl, sxx0);
        sxx1 = _mm256_fmadd_pd(dxh, dxh, sxx1);
        syy0 = _mm256_fmadd_pd(dyl, dyl, syy0);
        syy1 = _mm256_fmadd_pd(dyh, dyh, syy1);
    }
    CorrSums s;
    s.sxy = hsum(_mm256_add_pd(sxy0, sxy1));
    s.sxx = hsum(_mm256_add_pd(sxx0, sxx1));
    s.syy = hsum(_mm256_add_pd(syy0, syy1));
    for (; i < n; ++i) {
        double dx = double(px[i]) - mean_x;
        double dy = double(py[i]) - mean_y;
        s.sxy += dx * dy;
        s.sxx += dx * dx;
        s.syy += dy * dy;
    }
    return s;
}

void accumulate(std::span<double> acc, std::span<const float> x) {
    assert(acc.size() == x.size());
    double* pa = acc.data();
    const float* px = x.data();
    std::size_t n = x.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d a = _mm256_loadu_pd(pa + i);
        __m256d v = _mm256_cvtps_pd(_mm_loadu_ps(px + i));
        _mm256_storeu_pd(pa + i, _mm256_add_pd(a, v));
    }
    for (; i < n; ++i) pa[i] += px[i];
}

void min_inplace(std::span<float> a, std::span<const float> b) {
    assert(a.size() == b.size());
    float* pa = a.data();
    const float* pb = b.data();
    std::size_t n = a.size();
    std::size_t i = 0;
    // blend on b<a instead of min_ps: min_ps(0.0, -0.0) would flip the sign
    // bit relative to the scalar backend
    for (; i + 8 <= n; i += 8) {
        __m256 va = _mm256_loadu_ps(pa + i);
        __m256 vb = _mm256_loadu_ps(pb + i);
        __m256 lt = _mm256_cmp_ps(vb, va, _CMP_LT_OQ);
        _mm256_storeu_ps(pa + i, _mm256_blendv_ps(va, vb, lt));
    }
    for (; i < n; ++i)
        if (pb[i] < pa[i]) pa[i] = pb[i];
}

std::size_t count_above(std::span<const float> x, float threshold) {
    const float* p = x.data();
    std::size_t n = x.size();
    __m256 t = _mm256_set1_ps(threshold);
    std::size_t count = 0;
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 v = _mm256_loadu_ps(p + i);
        __m256 gt = _mm256_cmp_ps(v, t, _CMP_GT_OQ);
        count += std::size_t(__builtin_popcount(unsigned(_mm256_movemask_ps(gt))));
    }
    for (; i < n; ++i)
        if (p[i] > threshold) ++count;
    return count;
}

} // namespace pipecomm::kernels::avx2

#endif // PIPECOMM_HAVE_AVX2
