#include "pipecomm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pipecomm/errors.hpp"
#include "pipecomm/log.hpp"

namespace pipecomm {

WeightedGraph WeightedGraph::from_weights(std::vector<std::string> labels,
                                          std::vector<double> w) {
    WeightedGraph g;
    g.n = labels.size();
    if (w.size() != g.n * g.n)
        throw Error(Errc::node_set_mismatch, "weight matrix size does not match label count");
    g.labels = std::move(labels);
    g.w = std::move(w);
    for (std::size_t i = 0; i < g.n; ++i)
        for (std::size_t j = 0; j < g.n; ++j) {
            if (g.at(i, j) < 0.0 || !std::isfinite(g.at(i, j)))
                throw Error(Errc::negative_weight, "weight (" + std::to_string(i) + "," +
                                                       std::to_string(j) + ") is invalid");
            if (g.at(i, j) != g.at(j, i))
                throw Error(Errc::node_set_mismatch, "weight matrix is not symmetric");
        }
    g.degree.assign(g.n, 0.0);
    for (std::size_t i = 0; i < g.n; ++i) {
        double k = 0.0;
        for (std::size_t j = 0; j < g.n; ++j) k += g.at(i, j);
        g.degree[i] = k;
    }
    g.two_m = 0.0;
    for (double k : g.degree) g.two_m += k;
    if (g.two_m <= 0.0) throw Error(Errc::all_zero_graph, "graph has no positive weight");
    return g;
}

int Partition::n_communities() const {
    int c = 0;
    for (int a : assignment) c = std::max(c, a + 1);
    return c;
}

std::vector<int> canonical_labels(const std::vector<int>& assignment) {
    std::vector<int> remap(assignment.size(), -1);
    std::vector<int> out(assignment.size());
    int next = 0;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        int a = assignment[i];
        if (remap[std::size_t(a)] < 0) remap[std::size_t(a)] = next++;
        out[i] = remap[std::size_t(a)];
    }
    return out;
}

WeightedGraph from_similarity(const SimilarityMatrix& m, bool clamp_negative) {
    const std::size_t n = m.size();
    std::vector<std::string> labels;
    for (const auto& p : m.pipelines) labels.push_back(p.canonical());
    std::vector<double> w(n * n, 0.0);
    std::size_t clamped = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue; // no self-loops at level 0
            double r = m.at(i, j);
            if (r < 0.0) {
                if (!clamp_negative)
                    throw Error(Errc::negative_weight,
                                "similarity " + labels[i] + " vs " + labels[j] + " is negative");
                r = 0.0;
                ++clamped;
            }
            w[i * n + j] = r;
        }
    if (clamped > 0)
        warn("clamped " + std::to_string(clamped / 2) + " negative similarity edge(s) to 0");
    return WeightedGraph::from_weights(std::move(labels), std::move(w));
}

namespace {

void check_cover(const WeightedGraph& g, const Partition& p) {
    if (p.assignment.size() != g.n)
        throw Error(Errc::uncovered_node, "partition covers " +
                                              std::to_string(p.assignment.size()) + " of " +
                                              std::to_string(g.n) + " nodes");
    for (int a : p.assignment)
        if (a < 0) throw Error(Errc::uncovered_node, "node with negative community label");
}

// Q from per-community totals. in_c accumulates row partial sums in the
// same j-then-i order the degrees use, which makes the one-community case
// reproduce two_m bit for bit and hence Q exactly 0.
double modularity_of(const WeightedGraph& g, const std::vector<int>& assignment, double gamma) {
    int C = 0;
    for (int a : assignment) C = std::max(C, a + 1);
    std::vector<double> in(std::size_t(C), 0.0), tot(std::size_t(C), 0.0);
    for (std::size_t i = 0; i < g.n; ++i) {
        const int c = assignment[i];
        tot[std::size_t(c)] += g.degree[i];
        double row = 0.0;
        for (std::size_t j = 0; j < g.n; ++j)
            if (assignment[j] == c) row += g.at(i, j);
        in[std::size_t(c)] += row;
    }
    double q = 0.0;
    for (int c = 0; c < C; ++c) {
        const double frac_tot = tot[std::size_t(c)] / g.two_m;
        q += in[std::size_t(c)] / g.two_m - gamma * frac_tot * frac_tot;
    }
    return q;
}

} // namespace

double modularity(const WeightedGraph& g, const Partition& p, double gamma) {
    check_cover(g, p);
    return modularity_of(g, p.assignment, gamma);
}

namespace {

constexpr double kGainEps = 1e-12;

// One level of local moves on the working graph. Returns the within-level
// assignment (not canonicalized) and whether any node moved.
bool local_moves(const WeightedGraph& g, double gamma, std::mt19937_64& rng,
                 std::vector<int>& comm) {
    const std::size_t n = g.n;
    comm.resize(n);
    for (std::size_t i = 0; i < n; ++i) comm[i] = int(i);
    std::vector<double> tot(g.degree);
    std::vector<int> size(n, 1);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = std::size_t(rng() % i);
        std::swap(order[i - 1], order[j]);
    }

    std::vector<double> links(n, 0.0);
    std::vector<int> touched;
    bool any_move = false;
    bool moved = true;
    while (moved) {
        moved = false;
        for (std::size_t oi = 0; oi < n; ++oi) {
            const std::size_t i = order[oi];
            const int old = comm[std::size_t(i)];
            const double k = g.degree[i];

            touched.clear();
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double wij = g.at(i, j);
                if (wij <= 0.0) continue;
                const int c = comm[j];
                if (links[std::size_t(c)] == 0.0) touched.push_back(c);
                links[std::size_t(c)] += wij;
            }

            tot[std::size_t(old)] -= k;
            --size[std::size_t(old)];

            // staying put, scored after removal
            const double stay = links[std::size_t(old)] -
                                gamma * k * tot[std::size_t(old)] / g.two_m;

            // candidates: neighbor communities, plus the isolation option
            // (the old label if now empty, else the lowest empty label)
            std::vector<std::pair<int, double>> cand;
            for (int c : touched)
                if (c != old)
                    cand.emplace_back(c, links[std::size_t(c)] -
                                             gamma * k * tot[std::size_t(c)] / g.two_m);
            if (size[std::size_t(old)] > 0) {
                for (std::size_t c = 0; c < n; ++c)
                    if (size[c] == 0) {
                        cand.emplace_back(int(c), 0.0);
                        break;
                    }
            }
            std::sort(cand.begin(), cand.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            // strict > keeps the lowest label among equal gains
            int best_c = -1;
            double best_g = 0.0;
            for (const auto& [c, gain] : cand)
                if (best_c < 0 || gain > best_g) {
                    best_c = c;
                    best_g = gain;
                }

            const int target = (best_c >= 0 && best_g > stay + kGainEps) ? best_c : old;
            comm[std::size_t(i)] = target;
            tot[std::size_t(target)] += k;
            ++size[std::size_t(target)];
            if (target != old) {
                moved = true;
                any_move = true;
            }

            for (int c : touched) links[std::size_t(c)] = 0.0;
        }
    }
    return any_move;
}

WeightedGraph aggregate(const WeightedGraph& g, const std::vector<int>& comm, int C) {
    WeightedGraph out;
    out.n = std::size_t(C);
    out.labels.resize(out.n);
    for (int c = 0; c < C; ++c) out.labels[std::size_t(c)] = "agg" + std::to_string(c);
    out.w.assign(out.n * out.n, 0.0);
    for (std::size_t i = 0; i < g.n; ++i) {
        const int a = comm[i];
        for (std::size_t j = 0; j < g.n; ++j)
            out.w[std::size_t(a) * out.n + std::size_t(comm[j])] += g.at(i, j);
    }
    out.degree.assign(out.n, 0.0);
    for (std::size_t i = 0; i < out.n; ++i) {
        double k = 0.0;
        for (std::size_t j = 0; j < out.n; ++j) k += out.w[i * out.n + j];
        out.degree[i] = k;
    }
    out.two_m = 0.0;
    for (double k : out.degree) out.two_m += k;
    return out;
}

} // namespace

Partition louvain(const WeightedGraph& g, double gamma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    WeightedGraph work = g;
    std::vector<int> node_to_comm(g.n); // original node -> current-level node
    for (std::size_t i = 0; i < g.n; ++i) node_to_comm[i] = int(i);

    std::vector<int> comm;
    while (true) {
        const bool any_move = local_moves(work, gamma, rng, comm);
        if (!any_move) break;
        const std::vector<int> level = canonical_labels(comm);
        int C = 0;
        for (int a : level) C = std::max(C, a + 1);
        for (auto& a : node_to_comm) a = level[std::size_t(a)];
        if (std::size_t(C) == work.n) break;
        work = aggregate(work, level, C);
    }

    Partition p;
    p.assignment = canonical_labels(node_to_comm);
    p.resolution = gamma;
    p.modularity = modularity(g, p, gamma);
    return p;
}

Partition brute_force_best_partition(const WeightedGraph& g, double gamma) {
    if (g.n > 10)
        throw Error(Errc::too_large, "exhaustive search limited to 10 nodes, got " +
                                         std::to_string(g.n));
    const std::size_t n = g.n;
    std::vector<int> a(n, 0), m(n, 0); // restricted growth string + running max
    std::vector<int> best;
    double best_q = -std::numeric_limits<double>::infinity();

    // Enumerate RGS in lexicographic order; the first maximum wins, which is
    // the lexicographically smallest canonical labeling among ties.
    while (true) {
        const double q = modularity_of(g, a, gamma);
        if (q > best_q) {
            best_q = q;
            best = a;
        }
        std::size_t i = n;
        while (i-- > 1) {
            if (a[i] <= m[i - 1]) {
                ++a[i];
                m[i] = std::max(m[i - 1], a[i]);
                for (std::size_t j = i + 1; j < n; ++j) {
                    a[j] = 0;
                    m[j] = m[i];
                }
                break;
            }
            if (i == 1) {
                i = 0;
                break;
            }
        }
        if (i == 0 || n == 1) break;
    }

    Partition p;
    p.assignment = best;
    p.resolution = gamma;
    p.modularity = best_q;
    return p;
}

double adjusted_rand_index(const Partition& p, const Partition& q) {
    if (p.assignment.size() != q.assignment.size())
        throw Error(Errc::node_set_mismatch, "partitions cover different node counts");
    const std::size_t n = p.assignment.size();
    for (std::size_t i = 0; i < n; ++i)
        if (p.assignment[i] < 0 || q.assignment[i] < 0)
            throw Error(Errc::node_set_mismatch, "negative community label");
    const int cp = std::max(p.n_communities(), 1);
    const int cq = std::max(q.n_communities(), 1);
    std::vector<long long> table(std::size_t(cp) * std::size_t(cq), 0);
    std::vector<long long> pa(std::size_t(cp), 0), qb(std::size_t(cq), 0);
    for (std::size_t i = 0; i < n; ++i) {
        ++table[std::size_t(p.assignment[i]) * std::size_t(cq) + std::size_t(q.assignment[i])];
        ++pa[std::size_t(p.assignment[i])];
        ++qb[std::size_t(q.assignment[i])];
    }
    auto choose2 = [](long long x) { return x * (x - 1) / 2; };
    long long idx = 0, suma = 0, sumb = 0;
    for (long long t : table) idx += choose2(t);
    for (long long t : pa) suma += choose2(t);
    for (long long t : qb) sumb += choose2(t);
    const long long pairs = choose2((long long)n);
    const double expected = pairs == 0 ? 0.0 : double(suma) * double(sumb) / double(pairs);
    const double maxidx = 0.5 * double(suma + sumb);
    if (maxidx == expected) return 1.0; // both partitions trivial
    return (double(idx) - expected) / (maxidx - expected);
}

} // namespace pipecomm
