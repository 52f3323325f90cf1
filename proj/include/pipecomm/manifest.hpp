#pragma once

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "pipecomm/pipeline_id.hpp"

namespace pipecomm {

struct DatasetEntry {
    std::string contrast;
    std::string group_id;
    PipelineId pipeline;
    std::string path; // resolved relative to the manifest directory
};

// Immutable index over a rectangular (contrast x group x pipeline) dataset.
// Axis vectors are sorted, so iteration order is reproducible.
struct DatasetIndex {
    std::vector<DatasetEntry> entries;
    std::vector<std::string> contrasts;
    std::vector<std::string> groups;
    std::vector<PipelineId> pipelines;

    const std::string& path_for(const std::string& contrast, const std::string& group_id,
                                const PipelineId& pipeline) const;

private:
    friend DatasetIndex make_index(std::vector<DatasetEntry> entries);
    std::map<std::tuple<std::string, std::string, std::string>, std::size_t> by_key_;
};

// Validates no-duplicates and rectangularity; the error for a ragged dataset
// names the missing (contrast, group, pipeline) triples.
DatasetIndex make_index(std::vector<DatasetEntry> entries);

// CSV with header "contrast,group_id,pipeline_id,path".
DatasetIndex read_manifest(const std::string& path);

} // namespace pipecomm
