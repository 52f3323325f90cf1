#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "pipecomm/graph.hpp"

namespace pipecomm {

// How many of the n_groups per-group partitions put each pipeline pair in
// the same community.
struct CoOccurrenceMatrix {
    std::vector<PipelineId> pipelines;
    std::vector<long long> counts; // P*P row-major, diagonal = n_groups
    long long n_groups = 0;
    std::string contrast;

    std::size_t size() const { return pipelines.size(); }
    long long at(std::size_t i, std::size_t j) const { return counts[i * pipelines.size() + j]; }
    long long& at(std::size_t i, std::size_t j) { return counts[i * pipelines.size() + j]; }
};

struct StabilityReport {
    CoOccurrenceMatrix cooccurrence;
    Partition global_partition;
    std::vector<double> per_pair_rate; // counts / n_groups
    SimilarityMatrix mean_sim;
};

struct UnstablePair {
    PipelineId a, b;
    long long count = 0;
    int community = 0;
};

struct PairDelta {
    PipelineId a, b;
    double rate_a = 0.0, rate_b = 0.0, abs_delta = 0.0;
};

struct CrossContrastResult {
    double ari = 0.0;
    std::vector<PairDelta> pairs; // sorted by abs_delta descending
};

// One louvain partition per group, groups in the index's sorted order.
// Per-group seeds are seed xor fnv1a64(group_id), so a group keeps its
// partition when other groups come or go.
std::vector<Partition> per_group_partitions(const DatasetIndex& index, const std::string& contrast,
                                            const TargetGrid& grid, const Volume& mask,
                                            double gamma, std::uint64_t seed, bool clamp_negative,
                                            int jobs);

CoOccurrenceMatrix cooccurrence(const std::vector<Partition>& parts,
                                std::vector<PipelineId> pipelines, const std::string& contrast);

// Counts as edge weights, diagonal dropped, louvain on a seed stream
// distinct from every per-group stream.
Partition global_communities(const CoOccurrenceMatrix& c, double gamma, std::uint64_t seed);

CrossContrastResult cross_contrast(const StabilityReport& a, const StabilityReport& b);

// Same-community pairs (per the partition) whose count fell below `low`.
std::vector<UnstablePair> stability_flags(const CoOccurrenceMatrix& c, const Partition& p,
                                          long long low);

// Full per-contrast pipeline: per-group similarity + partitions, counts,
// global partition, mean similarity.
StabilityReport compute_stability(const DatasetIndex& index, const std::string& contrast,
                                  const TargetGrid& grid, const Volume& mask, double gamma,
                                  std::uint64_t seed, bool clamp_negative, int jobs);

void write_cooccurrence_csv(const CoOccurrenceMatrix& c, std::ostream& os);
void write_cooccurrence_csv(const CoOccurrenceMatrix& c, const std::string& path);

// {contrast, group_id, resolution, seed, modularity, communities:[[ids]]}
// with sorted keys; "communities" lists canonical pipeline strings.
std::string partition_json(const Partition& p, const std::vector<PipelineId>& pipelines,
                           const std::string& contrast, const std::string& group_id,
                           std::uint64_t seed);

// Inverse of partition_json for the given pipeline set: every pipeline must
// appear in exactly one community.
Partition parse_partition_json(const std::string& text,
                               const std::vector<PipelineId>& pipelines);

std::string stability_report_json(const StabilityReport& r, double gamma, std::uint64_t seed,
                                  long long unstable_threshold);

} // namespace pipecomm
