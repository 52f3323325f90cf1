#include "pipecomm/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "pipecomm/csv.hpp"
#include "pipecomm/errors.hpp"

namespace pipecomm {

const std::string& DatasetIndex::path_for(const std::string& contrast, const std::string& group_id,
                                          const PipelineId& pipeline) const {
    auto it = by_key_.find({contrast, group_id, pipeline.canonical()});
    if (it == by_key_.end())
        throw Error(Errc::malformed_manifest, "no entry for (" + contrast + ", " + group_id +
                                                  ", " + pipeline.canonical() + ")");
    return entries[it->second].path;
}

DatasetIndex make_index(std::vector<DatasetEntry> entries) {
    if (entries.empty()) throw Error(Errc::malformed_manifest, "dataset has no entries");

    DatasetIndex idx;
    idx.entries = std::move(entries);

    std::set<std::string> contrasts, groups;
    std::set<PipelineId> pipelines;
    for (std::size_t i = 0; i < idx.entries.size(); ++i) {
        const DatasetEntry& e = idx.entries[i];
        auto [it, inserted] =
            idx.by_key_.insert({{e.contrast, e.group_id, e.pipeline.canonical()}, i});
        if (!inserted)
            throw Error(Errc::malformed_manifest, "duplicate key (" + e.contrast + ", " +
                                                      e.group_id + ", " + e.pipeline.canonical() +
                                                      ")");
        contrasts.insert(e.contrast);
        groups.insert(e.group_id);
        pipelines.insert(e.pipeline);
    }
    idx.contrasts.assign(contrasts.begin(), contrasts.end());
    idx.groups.assign(groups.begin(), groups.end());
    idx.pipelines.assign(pipelines.begin(), pipelines.end());

    std::vector<std::string> missing;
    for (const auto& c : idx.contrasts)
        for (const auto& g : idx.groups)
            for (const auto& p : idx.pipelines)
                if (!idx.by_key_.count({c, g, p.canonical()}))
                    missing.push_back("(" + c + ", " + g + ", " + p.canonical() + ")");
    if (!missing.empty()) {
        std::string msg = std::to_string(missing.size()) + " missing triple(s):";
        for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += " " + missing[i];
        if (missing.size() > 10) msg += " ...";
        throw Error(Errc::non_rectangular_dataset, msg);
    }
    return idx;
}

DatasetIndex read_manifest(const std::string& path) {
    const auto rows = read_csv(path);
    if (rows.empty()) throw Error(Errc::malformed_manifest, path + ": empty file");
    const std::vector<std::string> header{"contrast", "group_id", "pipeline_id", "path"};
    if (rows[0] != header)
        throw Error(Errc::malformed_manifest,
                    path + ": header must be \"contrast,group_id,pipeline_id,path\"");

    const std::filesystem::path dir = std::filesystem::absolute(path).parent_path();
    std::vector<DatasetEntry> entries;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 4)
            throw Error(Errc::malformed_manifest,
                        path + ": row " + std::to_string(r + 1) + " has " +
                            std::to_string(rows[r].size()) + " fields, expected 4");
        DatasetEntry e;
        e.contrast = rows[r][0];
        e.group_id = rows[r][1];
        try {
            e.pipeline = parse_pipeline_id(rows[r][2]);
        } catch (const Error& err) {
            throw Error(Errc::malformed_manifest,
                        path + ": row " + std::to_string(r + 1) + ": " + err.what());
        }
        std::filesystem::path p = rows[r][3];
        e.path = (p.is_absolute() ? p : dir / p).lexically_normal().string();
        entries.push_back(std::move(e));
    }
    return make_index(std::move(entries));
}

} // namespace pipecomm
