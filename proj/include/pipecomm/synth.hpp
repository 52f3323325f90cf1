#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pipecomm/pipeline_id.hpp"

namespace pipecomm {

struct BlobSpec {
    std::array<int, 3> center{0, 0, 0}; // voxel index
    double radius = 0.0;                // voxels
    double amplitude = 0.0;

    // voxels with |idx - center|^2 <= radius^2 inside dims
    std::size_t n_voxels(const std::array<int, 3>& dims) const;
};

// Additive latent model: map(p, g) = scale_p * (blob + G_g + C_{k(p),g} +
// eps_{p,g}), every latent i.i.d. Normal per voxel. Closed-form pairwise
// correlations make it the workflow's quantitative oracle.
struct SynthConfig {
    std::array<int, 3> dims{16, 16, 16};
    int n_groups = 100;
    std::vector<PipelineId> pipelines; // canonical order; default all 24
    // contrast -> community label per pipeline (aligned with `pipelines`)
    std::map<std::string, std::vector<int>> planted;
    double sigma_group = 1.0;
    double sigma_community = 0.0;
    double sigma_noise = 0.0;
    std::optional<BlobSpec> blob;
    std::vector<double> scale; // per pipeline; default all 1
    std::uint64_t seed = 0;
};

// Strict JSON: unknown keys are rejected. A contrast maps either to an
// explicit {pipeline: label} object or to an integer k for k contiguous
// equal blocks in canonical order.
SynthConfig parse_synth_config(const std::string& json_text);
SynthConfig load_synth_config(const std::string& path);

struct ExpectedCorrelations {
    double within = 0.0;
    double between = 0.0;
};

// With the blob's empirical variance Vb = A^2 f (1-f), f its voxel
// fraction: within = (Vb+sG^2+sC^2)/(Vb+sG^2+sC^2+se^2), between =
// (Vb+sG^2)/same. Per-pipeline scales cancel.
ExpectedCorrelations expected_correlations(const SynthConfig& cfg);

struct SynthResult {
    std::string manifest_path;
    std::string ground_truth_path;
};

// Writes volumes, manifest.csv, ground_truth.json under out_dir. Outputs
// are a pure function of cfg, independent of jobs.
SynthResult generate(const SynthConfig& cfg, const std::string& out_dir, int jobs);

} // namespace pipecomm
