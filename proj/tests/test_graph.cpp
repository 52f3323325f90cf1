#include <doctest.h>

#include <random>

#include "pipecomm/errors.hpp"
#include "pipecomm/graph.hpp"

using namespace pipecomm;

namespace {

std::vector<std::string> names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back("n" + std::to_string(i));
    return out;
}

WeightedGraph from_edges(std::size_t n,
                         const std::vector<std::tuple<int, int, double>>& edges) {
    std::vector<double> w(n * n, 0.0);
    for (const auto& [i, j, v] : edges) {
        w[std::size_t(i) * n + std::size_t(j)] = v;
        w[std::size_t(j) * n + std::size_t(i)] = v;
    }
    return WeightedGraph::from_weights(names(n), w);
}

// two-block random graph; block membership: first half / second half
WeightedGraph planted_graph(std::size_t n, std::mt19937_64& rng, bool separated) {
    std::uniform_real_distribution<double> hi(0.9, 1.0);
    std::uniform_real_distribution<double> lo(0.0, 0.3);
    std::uniform_real_distribution<double> any(0.0, 1.0);
    std::vector<double> w(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const bool same = (i < n / 2) == (j < n / 2);
            const double v = separated ? (same ? hi(rng) : lo(rng)) : any(rng);
            w[i * n + j] = w[j * n + i] = v;
        }
    return WeightedGraph::from_weights(names(n), w);
}

Partition partition_of(const WeightedGraph& g, std::vector<int> assignment, double gamma = 1.0) {
    Partition p;
    p.assignment = std::move(assignment);
    p.resolution = gamma;
    p.modularity = modularity(g, p, gamma);
    return p;
}

} // namespace

TEST_CASE("graph construction validates its input") {
    CHECK_THROWS_AS(WeightedGraph::from_weights(names(2), {0, -1, -1, 0}), Error);
    CHECK_THROWS_AS(WeightedGraph::from_weights(names(2), {0, 1, 2, 0}), Error); // asymmetric
    CHECK_THROWS_AS(WeightedGraph::from_weights(names(2), {0, 0, 0, 0}), Error); // all zero
    CHECK_THROWS_AS(WeightedGraph::from_weights(names(3), {0, 1, 1, 0}), Error); // wrong size

    const WeightedGraph g = from_edges(3, {{0, 1, 2.0}, {1, 2, 1.0}});
    CHECK(g.degree == std::vector<double>{2, 3, 1});
    CHECK(g.two_m == 6.0);
}

TEST_CASE("similarity matrices convert with clamping or strictness") {
    SimilarityMatrix m;
    m.pipelines = {parse_pipeline_id("fsl,5,0,0"), parse_pipeline_id("fsl,8,0,0"),
                   parse_pipeline_id("spm,5,0,0")};
    m.contrast = "c";
    m.group_id = "g";
    m.r = {1.0, 0.8, -0.25, 0.8, 1.0, 0.1, -0.25, 0.1, 1.0};
    const WeightedGraph g = from_similarity(m, true);
    CHECK(g.at(0, 0) == 0.0); // self-similarity carries no information
    CHECK(g.at(0, 1) == 0.8);
    CHECK(g.at(0, 2) == 0.0); // negative clamped
    CHECK(g.at(1, 2) == 0.1);
    CHECK_THROWS_AS(from_similarity(m, false), Error);
}

TEST_CASE("modularity anchors are exact") {
    // complete graph on 4 nodes, one community: 0 by construction
    const WeightedGraph k4 = from_edges(
        4, {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {1, 2, 1}, {1, 3, 1}, {2, 3, 1}});
    CHECK(modularity(k4, partition_of(k4, {0, 0, 0, 0})) == 0.0);

    // single edge, nodes apart: -0.5 exactly
    const WeightedGraph edge = from_edges(2, {{0, 1, 1}});
    CHECK(modularity(edge, partition_of(edge, {0, 1})) == -0.5);

    // two disconnected triangles, split: 0.5 exactly
    const WeightedGraph tri = from_edges(
        6, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}, {3, 4, 1}, {3, 5, 1}, {4, 5, 1}});
    CHECK(modularity(tri, partition_of(tri, {0, 0, 0, 1, 1, 1})) == 0.5);
    CHECK(modularity(tri, partition_of(tri, {0, 0, 0, 0, 0, 0})) == 0.0);
}

TEST_CASE("modularity requires a full cover") {
    const WeightedGraph edge = from_edges(2, {{0, 1, 1}});
    Partition p;
    p.assignment = {0};
    CHECK_THROWS_AS(modularity(edge, p), Error);
}

TEST_CASE("louvain recovers obvious structure") {
    const WeightedGraph tri = from_edges(
        6, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}, {3, 4, 1}, {3, 5, 1}, {4, 5, 1}});
    const Partition p = louvain(tri, 1.0, 7);
    CHECK(p.assignment == std::vector<int>{0, 0, 0, 1, 1, 1});
    CHECK(p.modularity == 0.5);
    CHECK(p.n_communities() == 2);
}

TEST_CASE("louvain is deterministic in the seed") {
    std::mt19937_64 rng(5);
    const WeightedGraph g = planted_graph(8, rng, false);
    const Partition a = louvain(g, 1.0, 123);
    const Partition b = louvain(g, 1.0, 123);
    CHECK(a == b);
    CHECK(a.modularity == b.modularity);
}

TEST_CASE("louvain labels are canonical by first appearance") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const WeightedGraph g = planted_graph(7, rng, true);
        const Partition p = louvain(g, 1.0, std::uint64_t(trial));
        int next = 0;
        for (int c : p.assignment) {
            CHECK(c <= next);
            if (c == next) ++next;
        }
    }
}

TEST_CASE("brute force agrees with hand-enumerable optima") {
    const WeightedGraph edge = from_edges(2, {{0, 1, 1}});
    const Partition best = brute_force_best_partition(edge, 1.0);
    CHECK(best.assignment == std::vector<int>{0, 0});
    CHECK(best.modularity == 0.0);

    const WeightedGraph tri = from_edges(
        6, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}, {3, 4, 1}, {3, 5, 1}, {4, 5, 1}});
    CHECK(brute_force_best_partition(tri, 1.0).assignment ==
          std::vector<int>{0, 0, 0, 1, 1, 1});

    std::vector<double> big(11 * 11, 1.0);
    for (int i = 0; i < 11; ++i) big[std::size_t(i) * 11 + std::size_t(i)] = 0.0;
    CHECK_THROWS_AS(brute_force_best_partition(WeightedGraph::from_weights(names(11), big), 1.0),
                    Error);
}

TEST_CASE("louvain matches exhaustive search on separated graphs") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 4 + std::size_t(trial % 5);
        const WeightedGraph g = planted_graph(n, rng, true);
        const Partition exact = brute_force_best_partition(g, 1.0);
        const Partition found = louvain(g, 1.0, std::uint64_t(trial));
        CAPTURE(trial);
        CHECK(found.modularity == exact.modularity);
    }
}

TEST_CASE("louvain stays near the optimum on arbitrary graphs") {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 4 + std::size_t(trial % 5);
        const WeightedGraph g = planted_graph(n, rng, false);
        const Partition exact = brute_force_best_partition(g, 1.0);
        const Partition found = louvain(g, 1.0, std::uint64_t(trial));
        CAPTURE(trial);
        CHECK(found.modularity >= exact.modularity - 0.05);
        CHECK(found.modularity <= exact.modularity + 1e-12);
    }
}

TEST_CASE("resolution sweeps change community count monotonically here") {
    const WeightedGraph tri = from_edges(
        6, {{0, 1, 1}, {0, 2, 1}, {1, 2, 1}, {3, 4, 1}, {3, 5, 1}, {4, 5, 1}, {2, 3, 0.1}});
    const Partition coarse = louvain(tri, 0.01, 3); // tiny gamma merges everything
    CHECK(coarse.n_communities() == 1);
    const Partition fine = louvain(tri, 1.0, 3);
    CHECK(fine.n_communities() == 2);
}

TEST_CASE("adjusted rand index frozen cases") {
    auto part = [](std::vector<int> a) {
        Partition p;
        p.assignment = std::move(a);
        return p;
    };
    CHECK(adjusted_rand_index(part({0, 0, 1, 1}), part({0, 0, 1, 1})) == 1.0);
    CHECK(adjusted_rand_index(part({0, 0, 1, 1}), part({1, 1, 0, 0})) == 1.0);
    CHECK(adjusted_rand_index(part({0, 0, 1, 1}), part({0, 1, 1, 1})) == 0.0);
    CHECK(adjusted_rand_index(part({0, 0, 0, 1, 1, 1}), part({0, 0, 1, 1, 2, 2})) ==
          doctest::Approx(8.0 / 33.0).epsilon(1e-15));
    CHECK_THROWS_AS(adjusted_rand_index(part({0, 1}), part({0})), Error);
    CHECK_THROWS_AS(adjusted_rand_index(part({0, -1}), part({0, 0})), Error);
}

TEST_CASE("canonical relabelling is stable") {
    CHECK(canonical_labels({2, 2, 0, 1}) == std::vector<int>{0, 0, 1, 2});
    CHECK(canonical_labels({5}) == std::vector<int>{0});
    CHECK(canonical_labels({}) == std::vector<int>{});
}
