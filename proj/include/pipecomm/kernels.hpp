#pragma once

// Data-parallel inner loops over voxel vectors. Every kernel exists as a
// scalar reference implementation and, on x86-64, an AVX2 variant; the
// top-level entry points dispatch once at startup based on what the CPU
// supports. The two backends are equivalence-tested against each other.
//
// All reductions accumulate in double regardless of backend, so scalar and
// SIMD results differ only by summation order (last-ulp effects). For a
// fixed binary on a fixed machine the selected backend never changes, which
// keeps every downstream output byte-reproducible.

#include <cstddef>
#include <cstdint>
#include <span>

namespace pipecomm::kernels {

// Accumulated centered second moments of a vector pair.
struct CorrSums {
    double sxy = 0; // sum (x-mx)*(y-my)
    double sxx = 0; // sum (x-mx)^2
    double syy = 0; // sum (y-my)^2
};

// sum x[i]
double reduce_sum(std::span<const float> x);

// sum x[i]*y[i]; x and y must have equal length
double reduce_dot(std::span<const float> x, std::span<const float> y);

// Centered sums for Pearson's r (second pass of the two-pass algorithm).
CorrSums corr_sums(std::span<const float> x, std::span<const float> y,
                   double mean_x, double mean_y);

// acc[i] += x[i]
void accumulate(std::span<double> acc, std::span<const float> x);

// a[i] = min(a[i], b[i]); logical AND for {0,1} masks
void min_inplace(std::span<float> a, std::span<const float> b);

// count of x[i] > threshold
std::size_t count_above(std::span<const float> x, float threshold);

// Name of the backend the dispatcher selected ("avx2" or "scalar").
// Forced to "scalar" when PIPECOMM_FORCE_SCALAR is set in the environment.
const char* active_backend();

namespace scalar {
double reduce_sum(std::span<const float> x);
double reduce_dot(std::span<const float> x, std::span<const float> y);
CorrSums corr_sums(std::span<const float> x, std::span<const float> y,
                   double mean_x, double mean_y);
void accumulate(std::span<double> acc, std::span<const float> x);
void min_inplace(std::span<float> a, std::span<const float> b);
std::size_t count_above(std::span<const float> x, float threshold);
} // namespace scalar

#if defined(PIPECOMM_HAVE_AVX2)
namespace avx2 {
double reduce_sum(std::span<const float> x);
double reduce_dot(std::span<const float> x, std::span<const float> y);
CorrSums corr_sums(std::span<const float> x, std::span<const float> y,
                   double mean_x, double mean_y);
void accumulate(std::span<double> acc, std::span<const float> x);
void min_inplace(std::span<float> a, std::span<const float> b);
std::size_t count_above(std::span<const float> x, float threshold);
bool runtime_supported(); // CPUID check, independent of how this binary was compiled
} // namespace avx2
#endif

} // namespace pipecomm::kernels
