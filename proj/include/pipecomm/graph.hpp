#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pipecomm/simmatrix.hpp"

namespace pipecomm {

// Dense symmetric non-negative weighted graph. Self-loops follow the
// aggregation convention: w(i,i) stores twice the loop weight, so it
// contributes 2s to both k_i and 2m and modularity is preserved exactly
// when communities collapse into super-nodes.
struct WeightedGraph {
    std::size_t n = 0;
    std::vector<std::string> labels;
    std::vector<double> w; // n*n row-major, symmetric
    std::vector<double> degree;
    double two_m = 0.0;

    double at(std::size_t i, std::size_t j) const { return w[i * n + j]; }
    double& at(std::size_t i, std::size_t j) { return w[i * n + j]; }

    // Validates symmetry/non-negativity and computes degrees as row sums
    // (two_m as the sum of degrees, in index order, so whole-graph
    // aggregates reproduce bit for bit).
    static WeightedGraph from_weights(std::vector<std::string> labels, std::vector<double> w);
};

struct Partition {
    // Community labels are contiguous from 0, assigned by first appearance
    // in node order.
    std::vector<int> assignment;
    double modularity = 0.0;
    double resolution = 1.0;

    int n_communities() const;
    bool operator==(const Partition&) const = default;
};

// Relabels an arbitrary assignment into first-appearance canonical form.
std::vector<int> canonical_labels(const std::vector<int>& assignment);

// Similarity matrix as adjacency: diagonal dropped, negative entries either
// clamped to 0 (with a warning count) or rejected.
WeightedGraph from_similarity(const SimilarityMatrix& m, bool clamp_negative);

// Q = (1/2m) * sum_ij [w_ij - g*k_i*k_j/2m] * [c_i == c_j], evaluated as
// per-community aggregates so the single-community value is exactly 0.
double modularity(const WeightedGraph& g, const Partition& p, double gamma = 1.0);

// Two-phase heuristic: seeded-shuffle local moves until a full pass makes no
// move, then aggregate communities and recurse. Deterministic per seed.
Partition louvain(const WeightedGraph& g, double gamma, std::uint64_t seed);

// Exhaustive set-partition search, n <= 10. Equal-Q ties resolve to the
// lexicographically smallest canonical labeling.
Partition brute_force_best_partition(const WeightedGraph& g, double gamma);

// Pair-counting ARI; 1 for identical partitions up to relabeling.
double adjusted_rand_index(const Partition& p, const Partition& q);

} // namespace pipecomm
