#include "pipecomm/kernels.hpp"

#include <cassert>
#include <cstdlib>

namespace pipecomm::kernels {

namespace scalar {

double reduce_sum(std::span<const float> x) {
    double acc = 0;
    for (float v : x) acc += v;
    return acc;
}

double reduce_dot(std::span<const float> x, std::span<const float> y) {
    assert(x.size() == y.size());
    double acc = 0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += double(x[i]) * double(y[i]);
    return acc;
}

CorrSums corr_sums(std::span<const float> x, std::span<const float> y,
                   double mean_x, double mean_y) {
    assert(x.size() == y.size());
    CorrSums s;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = double(x[i]) - mean_x;
        double dy = double(y[i]) - mean_y;
        s.sxy += dx * dy;
        s.sxx += dx * dx;
        s.syy += dy * dy;
    }
    return s;
}

void accumulate(std::span<double> acc, std::span<const float> x) {
    assert(acc.size() == x.size());
    for (std::size_t i = 0; i < x.size(); ++i) acc[i] += x[i];
}

void min_inplace(std::span<float> a, std::span<const float> b) {
    assert(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        if (b[i] < a[i]) a[i] = b[i];
}

std::size_t count_above(std::span<const float> x, float threshold) {
    std::size_t n = 0;
    for (float v : x)
        if (v > threshold) ++n;
    return n;
}

} // namespace scalar

namespace {

struct Dispatch {
    double (*reduce_sum)(std::span<const float>);
    double (*reduce_dot)(std::span<const float>, std::span<const float>);
    CorrSums (*corr_sums)(std::span<const float>, std::span<const float>, double, double);
    void (*accumulate)(std::span<double>, std::span<const float>);
    void (*min_inplace)(std::span<float>, std::span<const float>);
    std::size_t (*count_above)(std::span<const float>, float);
    const char* name;
};

Dispatch select_backend() {
    Dispatch d{scalar::reduce_sum, scalar::reduce_dot,  scalar::corr_sums,
               scalar::accumulate, scalar::min_inplace, scalar::count_above,
               "scalar"};
#if defined(PIPECOMM_HAVE_AVX2)
    if (std::getenv("PIPECOMM_FORCE_SCALAR") == nullptr && avx2::runtime_supported()) {
        d = {avx2::reduce_sum, avx2::reduce_dot,  avx2::corr_sums,
             avx2::accumulate, avx2::min_inplace, avx2::count_above,
             "avx2"};
    }
#endif
    return d;
}

const Dispatch& backend() {
    static const Dispatch d = select_backend();
    return d;
}

} // namespace

double reduce_sum(std::span<const float> x) { return backend().reduce_sum(x); }

double reduce_dot(std::span<const float> x, std::span<const float> y) {
    return backend().reduce_dot(x, y);
}

CorrSums corr_sums(std::span<const float> x, std::span<const float> y,
                   double mean_x, double mean_y) {
    return backend().corr_sums(x, y, mean_x, mean_y);
}

void accumulate(std::span<double> acc, std::span<const float> x) {
    backend().accumulate(acc, x);
}

void min_inplace(std::span<float> a, std::span<const float> b) {
    backend().min_inplace(a, b);
}

std::size_t count_above(std::span<const float> x, float threshold) {
    return backend().count_above(x, threshold);
}

const char* active_backend() { return backend().name; }

} // namespace pipecomm::kernels
