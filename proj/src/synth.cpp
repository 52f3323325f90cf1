#include "pipecomm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "pipecomm/csv.hpp"
#include "pipecomm/errors.hpp"
#include "pipecomm/hash.hpp"
#include "pipecomm/parallel.hpp"
#include "pipecomm/volume.hpp"

namespace pipecomm {

std::size_t BlobSpec::n_voxels(const std::array<int, 3>& dims) const {
    std::size_t n = 0;
    const double r2 = radius * radius;
    for (int k = 0; k < dims[2]; ++k)
        for (int j = 0; j < dims[1]; ++j)
            for (int i = 0; i < dims[0]; ++i) {
                const double dx = i - center[0], dy = j - center[1], dz = k - center[2];
                if (dx * dx + dy * dy + dz * dz <= r2) ++n;
            }
    return n;
}

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(Errc::bad_config, msg); }

void validate(const SynthConfig& cfg) {
    for (int d : cfg.dims)
        if (d < 1) bad("dims must be positive");
    if (std::size_t(cfg.dims[0]) * std::size_t(cfg.dims[1]) * std::size_t(cfg.dims[2]) < 2)
        bad("need at least 2 voxels");
    if (cfg.n_groups < 1) bad("n_groups must be >= 1");
    if (cfg.sigma_group < 0 || cfg.sigma_community < 0 || cfg.sigma_noise < 0)
        bad("sigmas must be non-negative");
    if (cfg.sigma_group == 0 && cfg.sigma_community == 0 && cfg.sigma_noise == 0)
        bad("at least one sigma must be positive");
    if (cfg.pipelines.empty()) bad("pipeline list is empty");
    for (std::size_t i = 1; i < cfg.pipelines.size(); ++i)
        if (!(cfg.pipelines[i - 1] < cfg.pipelines[i]))
            bad("pipelines must be unique (they are kept in canonical order)");
    if (cfg.planted.empty()) bad("at least one contrast is required");
    for (const auto& [name, labels] : cfg.planted) {
        if (name.empty() || name.find_first_not_of("abcdefghijklmnopqrstuvwxyz"
                                                   "ABCDEFGHIJKLMNOPQRSTUVWXYZ"
                                                   "0123456789_-") != std::string::npos)
            bad("contrast name \"" + name + "\" must be [A-Za-z0-9_-]+");
        if (labels.size() != cfg.pipelines.size())
            bad("contrast \"" + name + "\" does not label every pipeline");
        for (int l : labels)
            if (l < 0) bad("negative community label in contrast \"" + name + "\"");
    }
    if (cfg.scale.size() != cfg.pipelines.size()) bad("scale list does not match pipelines");
    for (double s : cfg.scale)
        if (!(s > 0.0) || !std::isfinite(s)) bad("scales must be positive finite");
    if (cfg.blob) {
        const BlobSpec& b = *cfg.blob;
        if (!(b.radius >= 0.0)) bad("blob radius must be non-negative");
        if (b.radius >= std::min({cfg.dims[0], cfg.dims[1], cfg.dims[2]}) / 2.0)
            bad("blob radius must be < min(dims)/2");
        for (int d = 0; d < 3; ++d)
            if (b.center[std::size_t(d)] < 0 || b.center[std::size_t(d)] >= cfg.dims[std::size_t(d)])
                bad("blob center outside the volume");
        if (!std::isfinite(b.amplitude)) bad("blob amplitude must be finite");
    }
}

// Box-Muller on the generator's top 53 bits; pair-cached. Not std's
// normal_distribution, whose value sequence is implementation-defined.
class GaussStream {
public:
    explicit GaussStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        const double u1 = (double(rng_() >> 11) + 1.0) * 0x1p-53; // (0,1]
        const double u2 = double(rng_() >> 11) * 0x1p-53;         // [0,1)
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 rng_;
    bool have_ = false;
    double spare_ = 0.0;
};

void fill_gauss(std::vector<double>& buf, double sigma, std::uint64_t seed) {
    GaussStream s(seed);
    for (double& x : buf) x = sigma * s.next();
}

std::string group_name(int g, int n_groups) {
    int width = 1;
    for (int v = n_groups - 1; v >= 10; v /= 10) ++width;
    width = std::max(width, 3);
    std::string digits = std::to_string(g);
    return "g" + std::string(std::size_t(width) - digits.size(), '0') + digits;
}

std::string file_name(const PipelineId& p) {
    std::string s = p.canonical();
    std::replace(s.begin(), s.end(), ',', '-');
    return s + ".nii";
}

Affine synth_affine(const std::array<int, 3>& dims) {
    Affine a = Affine::scaling(2.0, 2.0, 2.0);
    for (int d = 0; d < 3; ++d) a.at(d, 3) = -double(dims[std::size_t(d)]);
    return a;
}

} // namespace

ExpectedCorrelations expected_correlations(const SynthConfig& cfg) {
    double vb = 0.0;
    if (cfg.blob) {
        const double nvox =
            double(cfg.dims[0]) * double(cfg.dims[1]) * double(cfg.dims[2]);
        const double f = double(cfg.blob->n_voxels(cfg.dims)) / nvox;
        vb = cfg.blob->amplitude * cfg.blob->amplitude * f * (1.0 - f);
    }
    const double g2 = cfg.sigma_group * cfg.sigma_group;
    const double c2 = cfg.sigma_community * cfg.sigma_community;
    const double e2 = cfg.sigma_noise * cfg.sigma_noise;
    const double denom = vb + g2 + c2 + e2;
    return {(vb + g2 + c2) / denom, (vb + g2) / denom};
}

SynthConfig parse_synth_config(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        bad(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) bad("config root must be an object");

    static const std::vector<std::string> known{
        "dims", "n_groups", "pipelines", "contrasts", "sigma_group", "sigma_community",
        "sigma_noise", "blob", "scale", "seed"};
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            bad("unknown config key \"" + key + "\"");
    if (!j.contains("contrasts")) bad("config requires \"contrasts\"");

    SynthConfig cfg;
    try {
        if (j.contains("dims")) {
            auto d = j.at("dims").get<std::vector<int>>();
            if (d.size() != 3) bad("dims must have 3 entries");
            cfg.dims = {d[0], d[1], d[2]};
        }
        if (j.contains("n_groups")) cfg.n_groups = j.at("n_groups").get<int>();
        if (j.contains("sigma_group")) cfg.sigma_group = j.at("sigma_group").get<double>();
        if (j.contains("sigma_community"))
            cfg.sigma_community = j.at("sigma_community").get<double>();
        if (j.contains("sigma_noise")) cfg.sigma_noise = j.at("sigma_noise").get<double>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();

        if (j.contains("pipelines")) {
            for (const auto& s : j.at("pipelines"))
                cfg.pipelines.push_back(parse_pipeline_id(s.get<std::string>()));
            std::sort(cfg.pipelines.begin(), cfg.pipelines.end());
        } else {
            cfg.pipelines = all_pipeline_ids();
        }
        const std::size_t P = cfg.pipelines.size();

        if (j.contains("blob")) {
            const auto& b = j.at("blob");
            if (!b.is_object()) bad("blob must be an object");
            for (const auto& [key, _] : b.items())
                if (key != "center" && key != "radius" && key != "amplitude")
                    bad("unknown blob key \"" + key + "\"");
            BlobSpec spec;
            auto c = b.at("center").get<std::vector<int>>();
            if (c.size() != 3) bad("blob center must have 3 entries");
            spec.center = {c[0], c[1], c[2]};
            spec.radius = b.at("radius").get<double>();
            spec.amplitude = b.at("amplitude").get<double>();
            cfg.blob = spec;
        }

        cfg.scale.assign(P, 1.0);
        if (j.contains("scale")) {
            if (!j.at("scale").is_object()) bad("scale must map pipeline id to multiplier");
            for (const auto& [key, val] : j.at("scale").items()) {
                const PipelineId id = parse_pipeline_id(key);
                const auto it =
                    std::lower_bound(cfg.pipelines.begin(), cfg.pipelines.end(), id);
                if (it == cfg.pipelines.end() || !(*it == id))
                    bad("scale names unknown pipeline \"" + key + "\"");
                cfg.scale[std::size_t(it - cfg.pipelines.begin())] = val.get<double>();
            }
        }

        const auto& contrasts = j.at("contrasts");
        if (!contrasts.is_object()) bad("contrasts must be an object");
        for (const auto& [name, spec] : contrasts.items()) {
            std::vector<int> labels(P, 0);
            if (spec.is_number_integer()) {
                const int k = spec.get<int>();
                if (k < 1 || std::size_t(k) > P) bad("community count out of range");
                for (std::size_t i = 0; i < P; ++i) labels[i] = int(i * std::size_t(k) / P);
            } else if (spec.is_object()) {
                if (spec.size() != P) bad("contrast \"" + name + "\" must label every pipeline");
                for (const auto& [key, val] : spec.items()) {
                    const PipelineId id = parse_pipeline_id(key);
                    const auto it =
                        std::lower_bound(cfg.pipelines.begin(), cfg.pipelines.end(), id);
                    if (it == cfg.pipelines.end() || !(*it == id))
                        bad("contrast \"" + name + "\" names unknown pipeline \"" + key + "\"");
                    labels[std::size_t(it - cfg.pipelines.begin())] = val.get<int>();
                }
            } else {
                bad("contrast \"" + name + "\" must be an integer or a {pipeline: label} object");
            }
            // relabel by first appearance so labels are contiguous from 0
            std::map<int, int> remap;
            int next = 0;
            for (int& l : labels) {
                if (l < 0) bad("negative community label in contrast \"" + name + "\"");
                const auto [it, fresh] = remap.emplace(l, next);
                if (fresh) ++next;
                l = it->second;
            }
            cfg.planted[name] = labels;
        }
    } catch (const nlohmann::json::exception& e) {
        bad(std::string("config field has the wrong type: ") + e.what());
    }

    validate(cfg);
    return cfg;
}

SynthConfig load_synth_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_synth_config(ss.str());
}

SynthResult generate(const SynthConfig& cfg_in, const std::string& out_dir, int jobs) {
    SynthConfig cfg = cfg_in;
    if (cfg.scale.empty()) cfg.scale.assign(cfg.pipelines.size(), 1.0);
    validate(cfg);
    namespace fs = std::filesystem;
    const fs::path root = out_dir;
    std::error_code ec;
    fs::create_directories(root / "vols", ec);
    if (ec) throw Error(Errc::io_error, "cannot create " + (root / "vols").string());

    const std::size_t nvox =
        std::size_t(cfg.dims[0]) * std::size_t(cfg.dims[1]) * std::size_t(cfg.dims[2]);
    const std::size_t P = cfg.pipelines.size();
    const Affine affine = synth_affine(cfg.dims);

    std::vector<double> blob(nvox, 0.0);
    if (cfg.blob) {
        const double r2 = cfg.blob->radius * cfg.blob->radius;
        std::size_t t = 0;
        for (int k = 0; k < cfg.dims[2]; ++k)
            for (int j = 0; j < cfg.dims[1]; ++j)
                for (int i = 0; i < cfg.dims[0]; ++i, ++t) {
                    const double dx = i - cfg.blob->center[0], dy = j - cfg.blob->center[1],
                                 dz = k - cfg.blob->center[2];
                    if (dx * dx + dy * dy + dz * dz <= r2) blob[t] = cfg.blob->amplitude;
                }
    }

    struct Item {
        const std::string* contrast;
        const std::vector<int>* labels;
        int group;
    };
    std::vector<Item> items;
    for (const auto& [name, labels] : cfg.planted)
        for (int g = 0; g < cfg.n_groups; ++g) items.push_back({&name, &labels, g});

    for (const auto& [name, labels] : cfg.planted)
        for (int g = 0; g < cfg.n_groups; ++g)
            fs::create_directories(root / "vols" / name / group_name(g, cfg.n_groups));

    parallel_for(items.size(), jobs, [&](std::size_t it) {
        const Item& item = items[it];
        const std::string& contrast = *item.contrast;
        const std::string gid = group_name(item.group, cfg.n_groups);
        const std::string tag = contrast + "|" + gid;

        std::vector<double> gfield(nvox);
        fill_gauss(gfield, cfg.sigma_group, cfg.seed ^ fnv1a64("G|" + tag));

        const int n_comm = 1 + *std::max_element(item.labels->begin(), item.labels->end());
        std::vector<std::vector<double>> cfield(std::size_t(n_comm), std::vector<double>(nvox, 0.0));
        for (int c = 0; c < n_comm; ++c)
            fill_gauss(cfield[std::size_t(c)], cfg.sigma_community,
                       cfg.seed ^ fnv1a64("C|" + tag + "|" + std::to_string(c)));

        std::vector<double> eps(nvox);
        Volume v;
        v.dims = cfg.dims;
        v.affine = affine;
        v.data.resize(nvox);
        for (std::size_t p = 0; p < P; ++p) {
            const std::string id = cfg.pipelines[p].canonical();
            fill_gauss(eps, cfg.sigma_noise, cfg.seed ^ fnv1a64("E|" + tag + "|" + id));
            const std::vector<double>& cf = cfield[std::size_t((*item.labels)[p])];
            const double s = cfg.scale[p];
            for (std::size_t i = 0; i < nvox; ++i)
                v.data[i] = float(s * (blob[i] + gfield[i] + cf[i] + eps[i]));
            write_volume(v, (root / "vols" / contrast / gid / file_name(cfg.pipelines[p])).string());
        }
    });

    const fs::path manifest = root / "manifest.csv";
    {
        std::ofstream os(manifest, std::ios::binary | std::ios::trunc);
        if (!os) throw Error(Errc::io_error, "cannot open " + manifest.string());
        write_csv_row(os, {"contrast", "group_id", "pipeline_id", "path"});
        for (const auto& [name, labels] : cfg.planted)
            for (int g = 0; g < cfg.n_groups; ++g) {
                const std::string gid = group_name(g, cfg.n_groups);
                for (const auto& p : cfg.pipelines)
                    write_csv_row(os, {name, gid, p.canonical(),
                                       "vols/" + name + "/" + gid + "/" + file_name(p)});
            }
        if (!os) throw Error(Errc::io_error, "write failed for " + manifest.string());
    }

    const fs::path truth = root / "ground_truth.json";
    {
        nlohmann::json j;
        j["dims"] = cfg.dims;
        j["n_groups"] = cfg.n_groups;
        j["seed"] = cfg.seed;
        j["sigma_group"] = cfg.sigma_group;
        j["sigma_community"] = cfg.sigma_community;
        j["sigma_noise"] = cfg.sigma_noise;
        j["manifest"] = "manifest.csv";
        auto pl = nlohmann::json::array();
        for (const auto& p : cfg.pipelines) pl.push_back(p.canonical());
        j["pipelines"] = std::move(pl);
        nlohmann::json scales;
        for (std::size_t p = 0; p < P; ++p) scales[cfg.pipelines[p].canonical()] = cfg.scale[p];
        j["scale"] = std::move(scales);
        if (cfg.blob)
            j["blob"] = {{"center", cfg.blob->center},
                         {"radius", cfg.blob->radius},
                         {"amplitude", cfg.blob->amplitude},
                         {"n_voxels", cfg.blob->n_voxels(cfg.dims)}};
        else
            j["blob"] = nullptr;
        const ExpectedCorrelations r = expected_correlations(cfg);
        j["expected_correlations"] = {{"within", r.within}, {"between", r.between}};
        nlohmann::json contrasts;
        for (const auto& [name, labels] : cfg.planted) {
            nlohmann::json planted;
            int n_comm = 0;
            for (std::size_t p = 0; p < P; ++p) {
                planted[cfg.pipelines[p].canonical()] = labels[p];
                n_comm = std::max(n_comm, labels[p] + 1);
            }
            auto comms = nlohmann::json::array();
            for (int c = 0; c < n_comm; ++c) {
                auto members = nlohmann::json::array();
                for (std::size_t p = 0; p < P; ++p)
                    if (labels[p] == c) members.push_back(cfg.pipelines[p].canonical());
                comms.push_back(std::move(members));
            }
            contrasts[name] = {{"planted", std::move(planted)}, {"communities", std::move(comms)}};
        }
        j["contrasts"] = std::move(contrasts);

        std::ofstream os(truth, std::ios::binary | std::ios::trunc);
        if (!os) throw Error(Errc::io_error, "cannot open " + truth.string());
        os << j.dump(2) << "\n";
        if (!os) throw Error(Errc::io_error, "write failed for " + truth.string());
    }

    return {manifest.string(), truth.string()};
}

} // namespace pipecomm
