#include "pipecomm/errors.hpp"

namespace pipecomm {

const char* errc_name(Errc c) {
    switch (c) {
    case Errc::unsupported_format: return "UnsupportedFormat";
    case Errc::truncated_file: return "TruncatedFile";
    case Errc::non_finite_data: return "NonFiniteData";
    case Errc::io_error: return "IoError";
    case Errc::bad_pipeline_id: return "BadPipelineId";
    case Errc::malformed_manifest: return "MalformedManifest";
    case Errc::non_rectangular_dataset: return "NonRectangularDataset";
    case Errc::singular_affine: return "SingularAffine";
    case Errc::grid_mismatch: return "GridMismatch";
    case Errc::empty_mask_list: return "EmptyMaskList";
    case Errc::empty_intersection: return "EmptyIntersection";
    case Errc::mask_mismatch: return "MaskMismatch";
    case Errc::zero_variance: return "ZeroVariance";
    case Errc::length_too_small: return "LengthTooSmall";
    case Errc::order_mismatch: return "OrderMismatch";
    case Errc::empty_list: return "EmptyList";
    case Errc::negative_weight: return "NegativeWeight";
    case Errc::all_zero_graph: return "AllZeroGraph";
    case Errc::uncovered_node: return "UncoveredNode";
    case Errc::too_large: return "TooLarge";
    case Errc::node_set_mismatch: return "NodeSetMismatch";
    case Errc::bad_p: return "BadP";
    case Errc::bad_q: return "BadQ";
    case Errc::bad_atlas_range: return "BadAtlasRange";
    case Errc::non_finite: return "NonFinite";
    case Errc::bad_config: return "BadConfig";
    }
    return "Unknown";
}

} // namespace pipecomm
