#include "pipecomm/pipeline_id.hpp"

#include <algorithm>

#include "pipecomm/errors.hpp"

namespace pipecomm {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

[[noreturn]] void bad(const std::string& s) {
    throw Error(Errc::bad_pipeline_id, "\"" + s + "\"");
}

} // namespace

std::string PipelineId::canonical() const {
    std::string out = software == Software::fsl ? "fsl" : "spm";
    out += ',';
    out += std::to_string(fwhm_mm);
    out += ',';
    out += std::to_string(n_motion);
    out += ',';
    out += std::to_string(hrf_deriv);
    return out;
}

PipelineId parse_pipeline_id(const std::string& s) {
    const std::string whole = trim(s);
    // Comma form tolerates whitespace around tokens; the hyphen form is exact.
    const bool comma = whole.find(',') != std::string::npos;
    std::vector<std::string> tok = split(whole, comma ? ',' : '-');
    if (tok.size() != 4) bad(s);
    if (comma)
        for (auto& t : tok) t = trim(t);

    PipelineId id;
    if (tok[0] == "fsl")
        id.software = Software::fsl;
    else if (tok[0] == "spm")
        id.software = Software::spm;
    else
        bad(s);

    if (tok[1] == "5")
        id.fwhm_mm = 5;
    else if (tok[1] == "8")
        id.fwhm_mm = 8;
    else
        bad(s);

    if (tok[2] == "0")
        id.n_motion = 0;
    else if (tok[2] == "6")
        id.n_motion = 6;
    else if (tok[2] == "24")
        id.n_motion = 24;
    else
        bad(s);

    if (tok[3] == "0")
        id.hrf_deriv = 0;
    else if (tok[3] == "1")
        id.hrf_deriv = 1;
    else
        bad(s);

    return id;
}

std::vector<PipelineId> all_pipeline_ids() {
    std::vector<PipelineId> out;
    for (Software sw : {Software::fsl, Software::spm})
        for (int fwhm : {5, 8})
            for (int motion : {0, 6, 24})
                for (int hrf : {0, 1})
                    out.push_back(PipelineId{sw, fwhm, motion, hrf});
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace pipecomm
