#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "pipecomm/manifest.hpp"
#include "pipecomm/resample.hpp"

namespace pipecomm {

// Pearson correlation of two same-mask vectors, clamped to [-1, 1].
// A constant vector is an error: a flat statistic map means something
// upstream is broken, and a silent r = 0 would hide it.
double pearson(const MaskedVector& x, const MaskedVector& y);

// P x P pipeline-vs-pipeline correlation matrix for one (contrast, group).
// Pipeline order is always the canonical sorted order, so matrices from
// different groups line up entry for entry.
struct SimilarityMatrix {
    std::vector<PipelineId> pipelines;
    std::vector<double> r; // P*P row-major
    std::string contrast;
    std::string group_id;

    std::size_t size() const { return pipelines.size(); }
    double& at(std::size_t i, std::size_t j) { return r[i * pipelines.size() + j]; }
    double at(std::size_t i, std::size_t j) const { return r[i * pipelines.size() + j]; }
};

// Loads every pipeline map for (contrast, group), resamples onto the grid,
// masks, and correlates all pairs.
SimilarityMatrix group_similarity(const DatasetIndex& index, const std::string& contrast,
                                  const std::string& group_id, const TargetGrid& grid,
                                  const Volume& mask);

// Elementwise mean across groups; result group_id = "mean".
SimilarityMatrix mean_similarity(const std::vector<SimilarityMatrix>& mats);

// Header row + one labeled row per pipeline, values with 9 significant digits.
void write_similarity_csv(const SimilarityMatrix& m, std::ostream& os);
void write_similarity_csv(const SimilarityMatrix& m, const std::string& path);

} // namespace pipecomm
