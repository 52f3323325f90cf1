#include "pipecomm/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>

#include "pipecomm/csv.hpp"
#include "pipecomm/errors.hpp"
#include "pipecomm/kernels.hpp"
#include "pipecomm/log.hpp"

namespace pipecomm {

MaskedVector mean_map(const std::vector<MaskedVector>& maps) {
    if (maps.empty()) throw Error(Errc::empty_list, "no maps to average");
    const std::size_t n = maps[0].n_voxels();
    for (const MaskedVector& m : maps)
        if (m.mask_hash != maps[0].mask_hash || m.n_voxels() != n)
            throw Error(Errc::mask_mismatch, "maps were extracted with different masks");
    std::vector<double> acc(n, 0.0);
    for (const MaskedVector& m : maps) kernels::accumulate(acc, m.values);
    MaskedVector out;
    out.mask_hash = maps[0].mask_hash;
    out.values.resize(n);
    const double inv = 1.0 / double(maps.size());
    for (std::size_t i = 0; i < n; ++i) out.values[i] = float(acc[i] * inv);
    return out;
}

double z_to_p(double z) {
    if (!std::isfinite(z)) throw Error(Errc::non_finite, "z is not finite");
    return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

ThresholdResult fdr_bh(const std::vector<double>& pvals, double q) {
    if (!(q > 0.0 && q < 1.0)) throw Error(Errc::bad_q, "q must be in (0,1)");
    if (pvals.empty()) throw Error(Errc::empty_list, "no p values to threshold");
    for (double p : pvals)
        if (!(p >= 0.0 && p <= 1.0)) throw Error(Errc::bad_p, "p values must be in [0,1]");

    std::vector<double> sorted(pvals);
    std::sort(sorted.begin(), sorted.end());
    const std::size_t m = sorted.size();
    std::size_t kstar = 0;
    for (std::size_t k = m; k >= 1; --k)
        if (sorted[k - 1] <= double(k) * q / double(m)) {
            kstar = k;
            break;
        }

    ThresholdResult r;
    r.z_threshold = std::numeric_limits<double>::quiet_NaN();
    r.n_rejected = kstar;
    r.q = q;
    r.n_tests = m;
    return r;
}

ThresholdedMap threshold_map(const MaskedVector& mean, double q) {
    std::vector<double> pvals(mean.n_voxels());
    for (std::size_t i = 0; i < pvals.size(); ++i) pvals[i] = z_to_p(mean.values[i]);
    ThresholdedMap out;
    out.result = fdr_bh(pvals, q);

    out.active.mask_hash = mean.mask_hash;
    out.active.values.assign(mean.n_voxels(), 0.0f);
    if (out.result.n_rejected == 0) return out;

    std::vector<double> sorted(pvals);
    std::nth_element(sorted.begin(), sorted.begin() + (out.result.n_rejected - 1), sorted.end());
    const double p_cut = sorted[out.result.n_rejected - 1];

    double z_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < pvals.size(); ++i)
        if (pvals[i] <= p_cut) {
            out.active.values[i] = 1.0f;
            z_min = std::min(z_min, double(mean.values[i]));
        }
    out.result.z_threshold = z_min;
    return out;
}

Volume roi_mask(const Volume& atlas, const TargetGrid& grid, double prob_threshold) {
    float lo = atlas.data.empty() ? 0.0f : atlas.data[0];
    float hi = lo;
    for (float v : atlas.data) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (lo < 0.0f || hi > 100.0f)
        throw Error(Errc::bad_atlas_range, "atlas values outside [0,100]");
    // percent-style atlas: scale the threshold, not the data, so 50 vs 0.5
    // compares exactly
    const double cut = hi > 1.0f ? prob_threshold * 100.0 : prob_threshold;

    Volume out = resample_nearest(atlas, grid);
    for (float& v : out.data) v = double(v) >= cut ? 1.0f : 0.0f;
    if (kernels::count_above(out.data, 0.5f) == 0) warn("ROI mask is empty");
    return out;
}

ActiveCounts count_active(const MaskedVector& active,
                          const std::optional<MaskedVector>& roi_in_mask) {
    ActiveCounts out;
    out.whole = kernels::count_above(active.values, 0.5f);
    if (roi_in_mask) {
        if (roi_in_mask->mask_hash != active.mask_hash ||
            roi_in_mask->n_voxels() != active.n_voxels())
            throw Error(Errc::grid_mismatch, "ROI vector does not share the activation mask");
        std::size_t k = 0;
        for (std::size_t i = 0; i < active.n_voxels(); ++i)
            if (active.values[i] > 0.5f && roi_in_mask->values[i] > 0.5f) ++k;
        out.roi = k;
    }
    return out;
}

void write_features_csv(const std::vector<FeatureRow>& rows, double q, std::ostream& os) {
    write_csv_row(os, {"contrast", "pipeline", "community", "n_active_whole", "n_active_roi",
                       "z_threshold", "q"});
    std::vector<FeatureRow> sorted(rows);
    std::stable_sort(sorted.begin(), sorted.end(), [](const FeatureRow& a, const FeatureRow& b) {
        if (a.community != b.community) return a.community < b.community;
        return a.pipeline < b.pipeline;
    });
    char buf[40];
    for (const FeatureRow& r : sorted) {
        std::snprintf(buf, sizeof buf, "%.9g", r.z_threshold);
        const std::string zstr = std::isnan(r.z_threshold) ? "" : buf;
        std::snprintf(buf, sizeof buf, "%.9g", q);
        write_csv_row(os, {r.contrast, r.pipeline.canonical(), std::to_string(r.community),
                           std::to_string(r.n_active_whole),
                           r.n_active_roi ? std::to_string(*r.n_active_roi) : "",
                           zstr, buf});
    }
}

void write_features_csv(const std::vector<FeatureRow>& rows, double q, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(Errc::io_error, "cannot open " + path + " for writing");
    write_features_csv(rows, q, os);
    if (!os) throw Error(Errc::io_error, "write failed for " + path);
}

} // namespace pipecomm
