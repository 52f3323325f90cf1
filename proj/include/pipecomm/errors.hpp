#pragma once

#include <stdexcept>
#include <string>

namespace pipecomm {

// Every failure mode the library can report. CLI exit codes are derived
// from the category (validation vs I/O).
enum class Errc {
    // dataset_io
    unsupported_format,
    truncated_file,
    non_finite_data,
    io_error,
    bad_pipeline_id,
    malformed_manifest,
    non_rectangular_dataset,
    // resample
    singular_affine,
    grid_mismatch,
    empty_mask_list,
    empty_intersection,
    // simmatrix
    mask_mismatch,
    zero_variance,
    length_too_small,
    order_mismatch,
    empty_list,
    // communities
    negative_weight,
    all_zero_graph,
    uncovered_node,
    too_large,
    node_set_mismatch,
    // features
    bad_p,
    bad_q,
    bad_atlas_range,
    non_finite,
    // cli / config
    bad_config,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, std::string msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg),
          code_(code), msg_(std::move(msg)) {}

    Errc code() const { return code_; }
    // what() minus the "Name: " prefix, for rethrowing with added context.
    const std::string& message() const { return msg_; }

private:
    Errc code_;
    std::string msg_;
};

// 2 = validation error, 3 = I/O error (4, internal, is reserved for
// anything that escapes as a non-Error exception).
inline int exit_code_for(Errc c) {
    switch (c) {
    case Errc::io_error:
    case Errc::truncated_file:
        return 3;
    default:
        return 2;
    }
}

} // namespace pipecomm
