#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "scaffold/cogmap.hpp"
#include "scaffold/geometry.hpp"

namespace scaffold {

/// Error distribution over one sample set. Bins are dense from 0 with fixed
/// width; an error e falls in bin floor(e / bin_width).
struct EvalSummary {
    size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double bin_width = 0.0;
    std::vector<std::pair<double, size_t>> histogram;  // (bin lower bound, count)
};

/// Extracts the first bracketed integer pair "[u, v]" in free text and
/// validates the [0,9] range. Throws Error on no parse or out-of-range cells.
GridCoord parse_grid_answer(const std::string& text);

/// Extracts the first parenthesized 7-tuple of reals, wraps the yaw, validates
/// sizes > 0. Throws Error on no parse or non-positive sizes.
Box7DoF parse_box7_answer(const std::string& text);

/// Summary of a raw error sample (all values >= 0).
EvalSummary summarize_errors(std::vector<double> errors, double bin_width);

/// Per-pair Euclidean distance in grid units.
EvalSummary cogmap_error(const std::vector<GridCoord>& preds,
                         const std::vector<GridCoord>& gts, double bin_width = 0.5);

struct GroundingErrorSummary {
    EvalSummary center;  // 3D Euclidean distance, meters
    EvalSummary size;    // mean of |dl|, |dw|, |dh|, meters
    EvalSummary yaw;     // wrapped absolute angle difference, radians
};

GroundingErrorSummary grounding_errors(const std::vector<Box7DoF>& preds,
                                       const std::vector<Box7DoF>& gts,
                                       double center_bin = 0.1, double size_bin = 0.1,
                                       double yaw_bin = 0.1);

/// CSV: header "bin_lower,count", one row per bin ascending, then rows
/// "mean,<v>" and "median,<v>". Deterministic bytes.
std::string write_histogram_csv(const EvalSummary& summary);

}  // namespace scaffold
