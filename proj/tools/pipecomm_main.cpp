#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pipecomm/csv.hpp"
#include "pipecomm/errors.hpp"
#include "pipecomm/features.hpp"
#include "pipecomm/kernels.hpp"
#include "pipecomm/log.hpp"
#include "pipecomm/parallel.hpp"
#include "pipecomm/stability.hpp"
#include "pipecomm/svg.hpp"
#include "pipecomm/synth.hpp"

namespace fs = std::filesystem;
using namespace pipecomm;

namespace {

struct CommonOpts {
    std::string manifest;
    std::vector<std::string> contrasts; // empty = all
    double gamma = 1.0;
    std::uint64_t seed = 0;
    double q = 0.05;
    int jobs = 1;
    std::string out = "out";
    std::string mask = "auto";
    std::string grid_ref;
    std::string dims_flag;
    std::string affine_flag;
    bool strict_negative = false;
    long long unstable = -1; // -1 = n_groups/2
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--manifest", o.manifest, "Dataset manifest CSV")->required();
    cmd->add_option("--contrast", o.contrasts, "Contrast(s) to process (default: all)");
    cmd->add_option("--gamma", o.gamma, "Modularity resolution");
    cmd->add_option("--seed", o.seed, "Master seed; every stream derives from it");
    cmd->add_option("--q", o.q, "FDR level");
    cmd->add_option("--jobs", o.jobs, "Worker threads (outputs are independent of this)");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--mask", o.mask,
                    "Brain mask volume, or \"auto\" to intersect the finite-voxel masks of "
                    "every selected volume");
    cmd->add_option("--grid", o.grid_ref,
                    "Reference volume defining the common grid (default: first selected volume)");
    cmd->add_option("--dims", o.dims_flag, "Grid dims nx,ny,nz (with --affine)");
    cmd->add_option("--affine", o.affine_flag, "Grid affine, 16 row-major values (with --dims)");
    cmd->add_flag("--strict-negative", o.strict_negative,
                  "Treat negative similarities as an error instead of clamping to 0");
    cmd->add_option("--unstable-threshold", o.unstable,
                    "Co-occurrence count below which a same-community pair is flagged "
                    "(default: half the groups)");
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw Error(Errc::bad_config, "cannot parse number \"" + tok + "\"");
        }
    }
    return out;
}

std::string sanitize(const std::string& name) {
    std::string out;
    for (char c : name)
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-') ? c : '_';
    return out.empty() ? "_" : out;
}

void ensure_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw Error(Errc::io_error, "cannot create directory " + p.string());
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error(Errc::io_error, "cannot open " + path.string() + " for writing");
    os << text;
    if (!os) throw Error(Errc::io_error, "write failed for " + path.string());
}

struct Prepared {
    DatasetIndex index;
    std::vector<std::string> contrasts;
    TargetGrid grid;
    Volume mask;
};

Prepared prepare(const CommonOpts& o) {
    if (!(o.gamma > 0.0)) throw Error(Errc::bad_config, "gamma must be > 0");
    if (!(o.q > 0.0 && o.q < 1.0)) throw Error(Errc::bad_config, "q must be in (0,1)");
    if (o.jobs < 1) throw Error(Errc::bad_config, "jobs must be >= 1");

    Prepared p{read_manifest(o.manifest), {}, {}, {}};

    if (o.contrasts.empty()) {
        p.contrasts = p.index.contrasts;
    } else {
        for (const std::string& c : o.contrasts) {
            if (std::find(p.index.contrasts.begin(), p.index.contrasts.end(), c) ==
                p.index.contrasts.end())
                throw Error(Errc::bad_config, "contrast \"" + c + "\" is not in the manifest");
            if (std::find(p.contrasts.begin(), p.contrasts.end(), c) == p.contrasts.end())
                p.contrasts.push_back(c);
        }
    }

    if (!o.dims_flag.empty() || !o.affine_flag.empty()) {
        if (o.dims_flag.empty() || o.affine_flag.empty())
            throw Error(Errc::bad_config, "--dims and --affine must be given together");
        const std::vector<double> d = parse_doubles(o.dims_flag);
        const std::vector<double> a = parse_doubles(o.affine_flag);
        if (d.size() != 3 || d[0] < 1 || d[1] < 1 || d[2] < 1)
            throw Error(Errc::bad_config, "--dims needs 3 positive integers");
        if (a.size() != 16) throw Error(Errc::bad_config, "--affine needs 16 values");
        p.grid.dims = {int(d[0]), int(d[1]), int(d[2])};
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) p.grid.affine.at(r, c) = a[std::size_t(r * 4 + c)];
        if (p.grid.affine.at(3, 0) != 0 || p.grid.affine.at(3, 1) != 0 ||
            p.grid.affine.at(3, 2) != 0 || p.grid.affine.at(3, 3) != 1)
            throw Error(Errc::bad_config, "--affine last row must be 0,0,0,1");
    } else if (!o.grid_ref.empty()) {
        p.grid = TargetGrid::like(read_volume(o.grid_ref));
    } else {
        const std::string& first =
            p.index.path_for(p.contrasts[0], p.index.groups[0], p.index.pipelines[0]);
        p.grid = TargetGrid::like(read_volume(first));
    }

    if (o.mask == "auto") {
        Volume acc = Volume::filled(p.grid.dims, p.grid.affine, 1.0f);
        for (const std::string& c : p.contrasts)
            for (const std::string& g : p.index.groups)
                for (const PipelineId& pl : p.index.pipelines) {
                    Volume m = resample_nearest(
                        read_finite_mask(p.index.path_for(c, g, pl)), p.grid);
                    kernels::min_inplace(acc.data, m.data);
                }
        p.mask = std::move(acc);
        if (kernels::count_above(p.mask.data, 0.5f) == 0)
            throw Error(Errc::empty_intersection, "auto mask is empty");
    } else {
        Volume m = resample_nearest(read_volume(o.mask), p.grid);
        for (float& v : m.data) v = v > 0.5f ? 1.0f : 0.0f;
        p.mask = std::move(m);
        if (kernels::count_above(p.mask.data, 0.5f) == 0)
            throw Error(Errc::empty_intersection, "mask " + o.mask + " selects no voxels");
    }
    return p;
}

std::vector<std::string> canonical_labels_of(const std::vector<PipelineId>& pipelines) {
    std::vector<std::string> out;
    for (const auto& p : pipelines) out.push_back(p.canonical());
    return out;
}

// display order: communities as contiguous blocks, canonical within each
std::vector<int> block_order(const Partition& p) {
    std::vector<int> order(p.assignment.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = int(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return p.assignment[std::size_t(a)] < p.assignment[std::size_t(b)];
    });
    return order;
}

int cmd_correlate(const CommonOpts& o) {
    const Prepared p = prepare(o);
    for (const std::string& contrast : p.contrasts) {
        const fs::path dir = fs::path(o.out) / sanitize(contrast);
        ensure_dir(dir);
        std::vector<SimilarityMatrix> sims(p.index.groups.size());
        parallel_for(p.index.groups.size(), o.jobs, [&](std::size_t gi) {
            sims[gi] = group_similarity(p.index, contrast, p.index.groups[gi], p.grid, p.mask);
        });
        for (std::size_t gi = 0; gi < sims.size(); ++gi)
            write_similarity_csv(sims[gi],
                                 (dir / ("similarity_" + sanitize(p.index.groups[gi]) + ".csv"))
                                     .string());
        const SimilarityMatrix mean = mean_similarity(sims);
        write_similarity_csv(mean, (dir / "similarity_mean.csv").string());
        HeatmapOptions hm;
        hm.title = "mean pipeline similarity: " + contrast;
        write_heatmap(mean.r, mean.size(), canonical_labels_of(mean.pipelines), hm,
                      (dir / "similarity_mean.svg").string());
        std::cout << "wrote " << (dir / "similarity_mean.csv").string() << " (+"
                  << sims.size() << " per-group CSVs, 1 SVG)\n";
    }
    return 0;
}

int cmd_stability(const CommonOpts& o) {
    const Prepared p = prepare(o);
    for (const std::string& contrast : p.contrasts) {
        const fs::path dir = fs::path(o.out) / sanitize(contrast);
        ensure_dir(dir);
        const StabilityReport rep = compute_stability(p.index, contrast, p.grid, p.mask, o.gamma,
                                                      o.seed, !o.strict_negative, o.jobs);
        write_cooccurrence_csv(rep.cooccurrence, (dir / "cooccurrence.csv").string());
        write_similarity_csv(rep.mean_sim, (dir / "similarity_mean.csv").string());
        write_text(dir / "global_partition.json",
                   partition_json(rep.global_partition, p.index.pipelines, contrast, "global",
                                  o.seed));
        const long long threshold =
            o.unstable >= 0 ? o.unstable : rep.cooccurrence.n_groups / 2;
        write_text(dir / "stability_report.json",
                   stability_report_json(rep, o.gamma, o.seed, threshold));

        std::vector<double> counts(rep.cooccurrence.counts.begin(),
                                   rep.cooccurrence.counts.end());
        HeatmapOptions hm;
        hm.title = "community co-occurrence: " + contrast + " (" +
                   std::to_string(rep.cooccurrence.n_groups) + " groups)";
        hm.integer_values = true;
        hm.order = block_order(rep.global_partition);
        hm.block_of = rep.global_partition.assignment;
        write_heatmap(counts, rep.cooccurrence.size(),
                      canonical_labels_of(rep.cooccurrence.pipelines), hm,
                      (dir / "cooccurrence.svg").string());

        const auto flags = stability_flags(rep.cooccurrence, rep.global_partition, threshold);
        std::cout << contrast << ": " << rep.global_partition.n_communities()
                  << " communities, modularity " << rep.global_partition.modularity << ", "
                  << flags.size() << " unstable pair(s) below " << threshold << "\n";
        for (const UnstablePair& u : flags)
            std::cout << "  unstable: " << u.a.canonical() << " | " << u.b.canonical() << " = "
                      << u.count << "/" << rep.cooccurrence.n_groups << " (community "
                      << u.community << ")\n";
    }
    return 0;
}

int cmd_features(const CommonOpts& o, const std::string& partition_path,
                 const std::string& atlas_path, double prob_threshold, bool write_thresholded) {
    const Prepared p = prepare(o);
    std::optional<MaskedVector> roi_vec;
    if (!atlas_path.empty()) {
        const Volume atlas = read_volume(atlas_path, NanPolicy::reject);
        roi_vec = apply_mask(roi_mask(atlas, p.grid, prob_threshold), p.mask);
    }
    for (const std::string& contrast : p.contrasts) {
        const fs::path dir = fs::path(o.out) / sanitize(contrast);
        ensure_dir(dir);
        Partition part;
        if (!partition_path.empty()) {
            part = parse_partition_json(slurp(partition_path), p.index.pipelines);
        } else {
            warn("no --partition given; running the stability pipeline for " + contrast);
            part = compute_stability(p.index, contrast, p.grid, p.mask, o.gamma, o.seed,
                                     !o.strict_negative, o.jobs)
                       .global_partition;
        }

        const std::size_t P = p.index.pipelines.size();
        std::vector<FeatureRow> rows(P);
        std::vector<MaskedVector> actives(P);
        parallel_for(P, o.jobs, [&](std::size_t pi) {
            const PipelineId& id = p.index.pipelines[pi];
            std::vector<double> acc;
            std::uint64_t hash = 0;
            for (const std::string& g : p.index.groups) {
                const MaskedVector vec = apply_mask(
                    resample_continuous(read_volume(p.index.path_for(contrast, g, id)), p.grid),
                    p.mask);
                if (acc.empty()) {
                    acc.assign(vec.n_voxels(), 0.0);
                    hash = vec.mask_hash;
                }
                kernels::accumulate(acc, vec.values);
            }
            MaskedVector mean;
            mean.mask_hash = hash;
            mean.values.resize(acc.size());
            const double inv = 1.0 / double(p.index.groups.size());
            for (std::size_t i = 0; i < acc.size(); ++i) mean.values[i] = float(acc[i] * inv);

            const ThresholdedMap thr = threshold_map(mean, o.q);
            const ActiveCounts counts = count_active(thr.active, roi_vec);
            FeatureRow row;
            row.pipeline = id;
            row.community = part.assignment[pi];
            row.n_active_whole = counts.whole;
            row.n_active_roi = counts.roi;
            row.z_threshold = thr.result.z_threshold;
            row.contrast = contrast;
            rows[pi] = row;
            if (write_thresholded) actives[pi] = thr.active;
        });

        write_features_csv(rows, o.q, (dir / "features.csv").string());
        if (write_thresholded) {
            ensure_dir(dir / "thresholded");
            for (std::size_t pi = 0; pi < P; ++pi) {
                std::string name = p.index.pipelines[pi].canonical();
                std::replace(name.begin(), name.end(), ',', '-');
                write_volume(scatter_to_volume(actives[pi], p.mask),
                             (dir / "thresholded" / (name + ".nii")).string());
            }
        }
        std::cout << "wrote " << (dir / "features.csv").string() << "\n";
    }
    return 0;
}

int cmd_compare(const CommonOpts& o) {
    if (o.contrasts.size() != 2)
        throw Error(Errc::bad_config, "compare needs exactly two --contrast values");
    const Prepared p = prepare(o);
    const std::string &ca = o.contrasts[0], &cb = o.contrasts[1];
    const StabilityReport ra =
        compute_stability(p.index, ca, p.grid, p.mask, o.gamma, o.seed, !o.strict_negative, o.jobs);
    const StabilityReport rb =
        compute_stability(p.index, cb, p.grid, p.mask, o.gamma, o.seed, !o.strict_negative, o.jobs);
    const CrossContrastResult res = cross_contrast(ra, rb);

    ensure_dir(o.out);
    const std::string stem = "compare_" + sanitize(ca) + "_vs_" + sanitize(cb);
    {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.9g", res.ari);
        write_text(fs::path(o.out) / (stem + ".json"),
                   std::string("{\n  \"ari\": ") + buf + ",\n  \"contrast_a\": \"" + ca +
                       "\",\n  \"contrast_b\": \"" + cb + "\"\n}\n");
    }
    {
        std::ofstream os(fs::path(o.out) / (stem + ".csv"), std::ios::binary | std::ios::trunc);
        if (!os) throw Error(Errc::io_error, "cannot open compare CSV for writing");
        write_csv_row(os, {"pipeline_a", "pipeline_b", "rate_a", "rate_b", "abs_delta"});
        char buf[48];
        for (const PairDelta& d : res.pairs) {
            std::vector<std::string> row{d.a.canonical(), d.b.canonical()};
            std::snprintf(buf, sizeof buf, "%.9g", d.rate_a);
            row.push_back(buf);
            std::snprintf(buf, sizeof buf, "%.9g", d.rate_b);
            row.push_back(buf);
            std::snprintf(buf, sizeof buf, "%.9g", d.abs_delta);
            row.push_back(buf);
            write_csv_row(os, row);
        }
    }
    std::cout << "ARI(" << ca << ", " << cb << ") = " << res.ari << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-pipeline statistic-map comparison: pipeline similarity graphs, "
                 "community detection, cross-group stability, and FDR-based activation counts"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "",
                   "INI config file with a [command] section; command-line flags win");

    CommonOpts oc, os, of, ox;
    std::string partition_path, atlas_path, synth_params, synth_out = "out";
    double prob_threshold = 0.5;
    bool write_thresholded = false;
    int synth_jobs = 1;

    CLI::App* correlate =
        app.add_subcommand("correlate", "Per-group and mean pipeline similarity matrices");
    correlate->configurable();
    add_common(correlate, oc);

    CLI::App* stability = app.add_subcommand(
        "stability", "Per-group partitions, co-occurrence counts, global communities");
    stability->configurable();
    add_common(stability, os);

    CLI::App* features = app.add_subcommand(
        "features", "Mean maps, FDR thresholding, per-community activation counts");
    features->configurable();
    add_common(features, of);
    features->add_option("--partition", partition_path,
                         "Global partition JSON (default: compute it here)");
    features->add_option("--atlas", atlas_path, "Probabilistic ROI atlas volume");
    features->add_option("--prob-threshold", prob_threshold, "ROI binarization threshold");
    features->add_flag("--write-thresholded", write_thresholded,
                       "Also write binary thresholded volumes");

    CLI::App* compare = app.add_subcommand(
        "compare", "Cross-contrast partition agreement (ARI) and per-pair rate deltas");
    compare->configurable();
    add_common(compare, ox);

    CLI::App* synth = app.add_subcommand(
        "synth", "Generate a synthetic dataset with planted communities");
    synth->add_option("params", synth_params, "Generator parameter JSON")->required();
    synth->add_option("--out", synth_out, "Output directory");
    synth->add_option("--jobs", synth_jobs, "Worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (correlate->parsed()) return cmd_correlate(oc);
        if (stability->parsed()) return cmd_stability(os);
        if (features->parsed())
            return cmd_features(of, partition_path, atlas_path, prob_threshold, write_thresholded);
        if (compare->parsed()) return cmd_compare(ox);
        if (synth->parsed()) {
            const SynthResult r = generate(load_synth_config(synth_params), synth_out, synth_jobs);
            std::cout << "wrote " << r.manifest_path << " and " << r.ground_truth_path << "\n";
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
