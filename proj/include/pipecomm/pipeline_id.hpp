#pragma once

#include <string>
#include <vector>

namespace pipecomm {

enum class Software { fsl, spm };

// One subject-level analysis configuration: software, smoothing kernel (mm),
// motion-regressor count, HRF-derivative flag. 2*2*3*2 = 24 combinations.
struct PipelineId {
    Software software = Software::fsl;
    int fwhm_mm = 5;   // {5, 8}
    int n_motion = 0;  // {0, 6, 24}
    int hrf_deriv = 0; // {0, 1}

    // "fsl,8,0,0" with no spaces.
    std::string canonical() const;

    bool operator==(const PipelineId&) const = default;
    // Order is lexicographic on the canonical string, so output files and
    // matrix axes sort identically everywhere.
    bool operator<(const PipelineId& o) const { return canonical() < o.canonical(); }
};

// Accepts "fsl,8,0,0" (optional whitespace around tokens) and "fsl-8-0-0".
// Throws Error(Errc::bad_pipeline_id) for anything else.
PipelineId parse_pipeline_id(const std::string& s);

// All 24 ids in canonical order.
std::vector<PipelineId> all_pipeline_ids();

} // namespace pipecomm
