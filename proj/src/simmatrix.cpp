#include "pipecomm/simmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "pipecomm/csv.hpp"
#include "pipecomm/errors.hpp"
#include "pipecomm/kernels.hpp"

namespace pipecomm {

double pearson(const MaskedVector& x, const MaskedVector& y) {
    if (x.mask_hash != y.mask_hash)
        throw Error(Errc::mask_mismatch, "vectors were extracted with different masks");
    if (x.n_voxels() != y.n_voxels())
        throw Error(Errc::mask_mismatch, "vector lengths differ");
    const std::size_t n = x.n_voxels();
    if (n < 2) throw Error(Errc::length_too_small, "need at least 2 voxels");

    const double mx = kernels::reduce_sum(x.values) / double(n);
    const double my = kernels::reduce_sum(y.values) / double(n);
    const kernels::CorrSums s = kernels::corr_sums(x.values, y.values, mx, my);
    if (s.sxx == 0.0 || s.syy == 0.0)
        throw Error(Errc::zero_variance, "constant input vector");
    return std::clamp(s.sxy / std::sqrt(s.sxx * s.syy), -1.0, 1.0);
}

SimilarityMatrix group_similarity(const DatasetIndex& index, const std::string& contrast,
                                  const std::string& group_id, const TargetGrid& grid,
                                  const Volume& mask) {
    SimilarityMatrix m;
    m.pipelines = index.pipelines;
    m.contrast = contrast;
    m.group_id = group_id;
    const std::size_t P = m.pipelines.size();
    m.r.assign(P * P, 1.0);

    std::vector<MaskedVector> vecs(P);
    for (std::size_t i = 0; i < P; ++i) {
        try {
            const Volume v = read_volume(index.path_for(contrast, group_id, m.pipelines[i]));
            vecs[i] = apply_mask(resample_continuous(v, grid), mask);
        } catch (const Error& e) {
            throw Error(e.code(), e.message() + " [" + contrast + "/" + group_id + ": " +
                                      m.pipelines[i].canonical() + "]");
        }
    }
    for (std::size_t i = 0; i < P; ++i)
        for (std::size_t j = i + 1; j < P; ++j) {
            double r;
            try {
                r = pearson(vecs[i], vecs[j]);
            } catch (const Error& e) {
                throw Error(e.code(), e.message() + " [" + contrast + "/" + group_id + ": " +
                                          m.pipelines[i].canonical() + " vs " +
                                          m.pipelines[j].canonical() + "]");
            }
            m.at(i, j) = r;
            m.at(j, i) = r;
        }
    return m;
}

SimilarityMatrix mean_similarity(const std::vector<SimilarityMatrix>& mats) {
    if (mats.empty()) throw Error(Errc::empty_list, "no matrices to average");
    SimilarityMatrix out = mats[0];
    out.group_id = "mean";
    for (std::size_t k = 1; k < mats.size(); ++k) {
        const SimilarityMatrix& m = mats[k];
        if (m.pipelines != out.pipelines || m.contrast != out.contrast)
            throw Error(Errc::order_mismatch,
                        "matrices disagree on contrast or pipeline order");
        for (std::size_t i = 0; i < out.r.size(); ++i) out.r[i] += m.r[i];
    }
    const double inv = 1.0 / double(mats.size());
    for (auto& x : out.r) x *= inv;
    return out;
}

namespace {

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

} // namespace

void write_similarity_csv(const SimilarityMatrix& m, std::ostream& os) {
    std::vector<std::string> row;
    row.push_back("pipeline");
    for (const auto& p : m.pipelines) row.push_back(p.canonical());
    write_csv_row(os, row);
    for (std::size_t i = 0; i < m.size(); ++i) {
        row.clear();
        row.push_back(m.pipelines[i].canonical());
        for (std::size_t j = 0; j < m.size(); ++j) row.push_back(fmt9(m.at(i, j)));
        write_csv_row(os, row);
    }
}

void write_similarity_csv(const SimilarityMatrix& m, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(Errc::io_error, "cannot open " + path + " for writing");
    write_similarity_csv(m, os);
    if (!os) throw Error(Errc::io_error, "write failed for " + path);
}

} // namespace pipecomm
