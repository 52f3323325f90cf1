#pragma once

#include <string>
#include <vector>

namespace pipecomm {

struct HeatmapOptions {
    std::string title;
    // annotate cells as integers instead of 2-decimal values
    bool integer_values = false;
    // display position -> source index; empty means identity
    std::vector<int> order;
    // community label per source index; draws separators between blocks
    std::vector<int> block_of;
};

// Self-contained SVG 1.1: n x n colored cells, row/column labels, annotated
// values, linear color legend with min/max. Byte-deterministic for fixed
// input.
std::string render_heatmap(const std::vector<double>& matrix, std::size_t n,
                           const std::vector<std::string>& labels, const HeatmapOptions& opt);

void write_heatmap(const std::vector<double>& matrix, std::size_t n,
                   const std::vector<std::string>& labels, const HeatmapOptions& opt,
                   const std::string& path);

} // namespace pipecomm
