#include "pipecomm/stability.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "pipecomm/csv.hpp"
#include "pipecomm/errors.hpp"
#include "pipecomm/hash.hpp"
#include "pipecomm/parallel.hpp"

namespace pipecomm {

namespace {

// Shared driver: per-group similarity and partition, groups in index order.
void run_groups(const DatasetIndex& index, const std::string& contrast, const TargetGrid& grid,
                const Volume& mask, double gamma, std::uint64_t seed, bool clamp_negative,
                int jobs, std::vector<SimilarityMatrix>* sims_out,
                std::vector<Partition>& parts_out) {
    const std::vector<std::string>& groups = index.groups;
    parts_out.resize(groups.size());
    if (sims_out) sims_out->resize(groups.size());
    parallel_for(groups.size(), jobs, [&](std::size_t gi) {
        SimilarityMatrix sim = group_similarity(index, contrast, groups[gi], grid, mask);
        WeightedGraph g = from_similarity(sim, clamp_negative);
        parts_out[gi] = louvain(g, gamma, seed ^ fnv1a64(groups[gi]));
        if (sims_out) (*sims_out)[gi] = std::move(sim);
    });
}

} // namespace

std::vector<Partition> per_group_partitions(const DatasetIndex& index, const std::string& contrast,
                                            const TargetGrid& grid, const Volume& mask,
                                            double gamma, std::uint64_t seed, bool clamp_negative,
                                            int jobs) {
    std::vector<Partition> parts;
    run_groups(index, contrast, grid, mask, gamma, seed, clamp_negative, jobs, nullptr, parts);
    return parts;
}

CoOccurrenceMatrix cooccurrence(const std::vector<Partition>& parts,
                                std::vector<PipelineId> pipelines, const std::string& contrast) {
    if (parts.empty()) throw Error(Errc::empty_list, "no partitions to count");
    const std::size_t P = pipelines.size();
    for (const Partition& p : parts)
        if (p.assignment.size() != P)
            throw Error(Errc::node_set_mismatch, "partition does not cover the pipeline set");

    CoOccurrenceMatrix c;
    c.pipelines = std::move(pipelines);
    c.contrast = contrast;
    c.n_groups = (long long)parts.size();
    c.counts.assign(P * P, 0);
    for (const Partition& p : parts)
        for (std::size_t i = 0; i < P; ++i)
            for (std::size_t j = i + 1; j < P; ++j)
                if (p.assignment[i] == p.assignment[j]) {
                    ++c.at(i, j);
                    ++c.at(j, i);
                }
    for (std::size_t i = 0; i < P; ++i) c.at(i, i) = c.n_groups;
    return c;
}

Partition global_communities(const CoOccurrenceMatrix& c, double gamma, std::uint64_t seed) {
    const std::size_t P = c.size();
    std::vector<std::string> labels;
    for (const auto& p : c.pipelines) labels.push_back(p.canonical());
    std::vector<double> w(P * P, 0.0);
    for (std::size_t i = 0; i < P; ++i)
        for (std::size_t j = 0; j < P; ++j)
            if (i != j) w[i * P + j] = double(c.at(i, j));
    WeightedGraph g = WeightedGraph::from_weights(std::move(labels), std::move(w));
    // seed stream distinct from every per-group stream
    return louvain(g, gamma, seed ^ fnv1a64("global"));
}

CrossContrastResult cross_contrast(const StabilityReport& a, const StabilityReport& b) {
    if (a.cooccurrence.pipelines != b.cooccurrence.pipelines)
        throw Error(Errc::node_set_mismatch, "reports cover different pipeline sets");
    if (a.cooccurrence.n_groups < 1 || b.cooccurrence.n_groups < 1)
        throw Error(Errc::empty_list, "report covers no groups");
    CrossContrastResult out;
    out.ari = adjusted_rand_index(a.global_partition, b.global_partition);
    const std::size_t P = a.cooccurrence.size();
    for (std::size_t i = 0; i < P; ++i)
        for (std::size_t j = i + 1; j < P; ++j) {
            PairDelta d;
            d.a = a.cooccurrence.pipelines[i];
            d.b = a.cooccurrence.pipelines[j];
            d.rate_a = double(a.cooccurrence.at(i, j)) / double(a.cooccurrence.n_groups);
            d.rate_b = double(b.cooccurrence.at(i, j)) / double(b.cooccurrence.n_groups);
            d.abs_delta = std::abs(d.rate_a - d.rate_b);
            out.pairs.push_back(d);
        }
    std::stable_sort(out.pairs.begin(), out.pairs.end(),
                     [](const PairDelta& x, const PairDelta& y) { return x.abs_delta > y.abs_delta; });
    return out;
}

std::vector<UnstablePair> stability_flags(const CoOccurrenceMatrix& c, const Partition& p,
                                          long long low) {
    std::vector<UnstablePair> out;
    const std::size_t P = c.size();
    if (p.assignment.size() != P)
        throw Error(Errc::node_set_mismatch, "partition does not cover the pipeline set");
    for (std::size_t i = 0; i < P; ++i)
        for (std::size_t j = i + 1; j < P; ++j)
            if (p.assignment[i] == p.assignment[j] && c.at(i, j) < low)
                out.push_back({c.pipelines[i], c.pipelines[j], c.at(i, j), p.assignment[i]});
    return out;
}

StabilityReport compute_stability(const DatasetIndex& index, const std::string& contrast,
                                  const TargetGrid& grid, const Volume& mask, double gamma,
                                  std::uint64_t seed, bool clamp_negative, int jobs) {
    StabilityReport r;
    std::vector<SimilarityMatrix> sims;
    std::vector<Partition> parts;
    run_groups(index, contrast, grid, mask, gamma, seed, clamp_negative, jobs, &sims, parts);
    r.cooccurrence = cooccurrence(parts, index.pipelines, contrast);
    r.global_partition = global_communities(r.cooccurrence, gamma, seed);
    r.per_pair_rate.resize(r.cooccurrence.counts.size());
    for (std::size_t i = 0; i < r.per_pair_rate.size(); ++i)
        r.per_pair_rate[i] = double(r.cooccurrence.counts[i]) / double(r.cooccurrence.n_groups);
    r.mean_sim = mean_similarity(sims);
    return r;
}

void write_cooccurrence_csv(const CoOccurrenceMatrix& c, std::ostream& os) {
    std::vector<std::string> row;
    row.push_back("pipeline");
    for (const auto& p : c.pipelines) row.push_back(p.canonical());
    write_csv_row(os, row);
    for (std::size_t i = 0; i < c.size(); ++i) {
        row.clear();
        row.push_back(c.pipelines[i].canonical());
        for (std::size_t j = 0; j < c.size(); ++j) row.push_back(std::to_string(c.at(i, j)));
        write_csv_row(os, row);
    }
}

void write_cooccurrence_csv(const CoOccurrenceMatrix& c, const std::string& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(Errc::io_error, "cannot open " + path + " for writing");
    write_cooccurrence_csv(c, os);
    if (!os) throw Error(Errc::io_error, "write failed for " + path);
}

namespace {

nlohmann::json communities_json(const Partition& p, const std::vector<PipelineId>& pipelines) {
    auto comms = nlohmann::json::array();
    for (int c = 0; c < p.n_communities(); ++c) {
        auto members = nlohmann::json::array();
        for (std::size_t i = 0; i < pipelines.size(); ++i)
            if (p.assignment[i] == c) members.push_back(pipelines[i].canonical());
        comms.push_back(std::move(members));
    }
    return comms;
}

} // namespace

std::string partition_json(const Partition& p, const std::vector<PipelineId>& pipelines,
                           const std::string& contrast, const std::string& group_id,
                           std::uint64_t seed) {
    nlohmann::json j;
    j["contrast"] = contrast;
    j["group_id"] = group_id;
    j["resolution"] = p.resolution;
    j["seed"] = seed;
    j["modularity"] = p.modularity;
    j["communities"] = communities_json(p, pipelines);
    return j.dump(2) + "\n";
}

Partition parse_partition_json(const std::string& text,
                               const std::vector<PipelineId>& pipelines) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::bad_config, std::string("partition file is not valid JSON: ") + e.what());
    }
    std::map<std::string, int> comm_of;
    try {
        const auto& comms = j.at("communities");
        int c = 0;
        for (const auto& members : comms) {
            for (const auto& m : members)
                if (!comm_of.insert({m.get<std::string>(), c}).second)
                    throw Error(Errc::node_set_mismatch,
                                "pipeline " + m.get<std::string>() + " listed twice");
            ++c;
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::bad_config, std::string("partition file malformed: ") + e.what());
    }
    Partition p;
    p.assignment.resize(pipelines.size());
    for (std::size_t i = 0; i < pipelines.size(); ++i) {
        const auto it = comm_of.find(pipelines[i].canonical());
        if (it == comm_of.end())
            throw Error(Errc::uncovered_node,
                        "partition does not cover pipeline " + pipelines[i].canonical());
        p.assignment[i] = it->second;
    }
    if (comm_of.size() != pipelines.size())
        throw Error(Errc::node_set_mismatch, "partition names pipelines outside the dataset");
    p.assignment = canonical_labels(p.assignment);
    if (j.contains("modularity")) p.modularity = j.at("modularity").get<double>();
    if (j.contains("resolution")) p.resolution = j.at("resolution").get<double>();
    return p;
}

std::string stability_report_json(const StabilityReport& r, double gamma, std::uint64_t seed,
                                  long long unstable_threshold) {
    const CoOccurrenceMatrix& c = r.cooccurrence;
    nlohmann::json j;
    j["contrast"] = c.contrast;
    j["n_groups"] = c.n_groups;
    j["n_pipelines"] = c.size();
    j["gamma"] = gamma;
    j["seed"] = seed;
    j["statistic_scale"] = "z";
    auto pl = nlohmann::json::array();
    for (const auto& p : c.pipelines) pl.push_back(p.canonical());
    j["pipelines"] = std::move(pl);
    j["global"] = {
        {"modularity", r.global_partition.modularity},
        {"resolution", r.global_partition.resolution},
        {"communities", communities_json(r.global_partition, c.pipelines)},
    };
    j["unstable_threshold"] = unstable_threshold;
    auto flags = nlohmann::json::array();
    for (const UnstablePair& u : stability_flags(c, r.global_partition, unstable_threshold))
        flags.push_back({{"a", u.a.canonical()},
                         {"b", u.b.canonical()},
                         {"count", u.count},
                         {"community", u.community}});
    j["unstable_pairs"] = std::move(flags);
    return j.dump(2) + "\n";
}

} // namespace pipecomm
