#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pipecomm/graph.hpp"
#include "pipecomm/resample.hpp"

namespace pipecomm {

struct ThresholdResult {
    double z_threshold = 0.0; // NaN when nothing was rejected
    std::size_t n_rejected = 0;
    double q = 0.0;
    std::size_t n_tests = 0;
};

struct FeatureRow {
    PipelineId pipeline;
    int community = 0;
    std::size_t n_active_whole = 0;
    std::optional<std::size_t> n_active_roi; // absent when no ROI was given
    double z_threshold = 0.0;
    std::string contrast;
};

// Voxelwise mean across maps sharing one mask.
MaskedVector mean_map(const std::vector<MaskedVector>& maps);

// One-sided upper-tail p = 1 - Phi(z).
double z_to_p(double z);

// Benjamini-Hochberg step-up. Rejects the k* smallest p where
// k* = max{k : p(k) <= k*q/m}; z_threshold is left NaN here.
ThresholdResult fdr_bh(const std::vector<double>& pvals, double q);

struct ThresholdedMap {
    MaskedVector active; // values in {0,1}, same mask as the input
    ThresholdResult result;
};

// BH over the per-voxel upper-tail p values; active iff rejected.
// z_threshold becomes the smallest active z.
ThresholdedMap threshold_map(const MaskedVector& mean, double q);

// Probabilistic atlas ([0,1], or [0,100] rescaled) resampled nearest onto
// the grid and binarized at >= prob_threshold.
Volume roi_mask(const Volume& atlas, const TargetGrid& grid, double prob_threshold = 0.5);

struct ActiveCounts {
    std::size_t whole = 0;
    std::optional<std::size_t> roi;
};

// roi_in_mask must come from the same mask as active (hash-checked).
ActiveCounts count_active(const MaskedVector& active,
                          const std::optional<MaskedVector>& roi_in_mask);

// contrast,pipeline,community,n_active_whole,n_active_roi,z_threshold,q.
// Rows grouped by community, pipelines canonical within each.
void write_features_csv(const std::vector<FeatureRow>& rows, double q, std::ostream& os);
void write_features_csv(const std::vector<FeatureRow>& rows, double q, const std::string& path);

} // namespace pipecomm
