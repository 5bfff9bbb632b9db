#pragma once

#include <string>
#include <utility>

#include "scaffold/scene.hpp"

namespace scaffold {

/// Cell of the 10x10 map grid.
struct GridCoord {
    int u = 0;
    int v = 0;

    bool operator==(const GridCoord& o) const { return u == o.u && v == o.v; }
    bool operator!=(const GridCoord& o) const { return !(*this == o); }
};

inline constexpr int kGridSize = 10;
inline constexpr GridCoord kAnchorACell{5, 5};
inline constexpr GridCoord kAnchorBCell{5, 3};

/// One triplet on the 10x10 grid: two anchors at the fixed cells (5,5)/(5,3)
/// and one target whose normalized relative position is quantized to a cell.
/// target_grid = clamp(round(target_grid_continuous)); out_of_grid is true iff
/// the continuous coordinates fall outside [0,9]^2.
struct LocalCogMap {
    std::string anchor_a_id;
    std::string anchor_b_id;
    std::string target_id;
    GridCoord target_grid;
    Vec2 target_grid_continuous;  // x -> u, y -> v
    bool out_of_grid = false;

    static constexpr GridCoord anchor_a_cell() { return kAnchorACell; }
    static constexpr GridCoord anchor_b_cell() { return kAnchorBCell; }
};

/// Rounds half away from zero per component, clamps to [0,9]. The flag is true
/// iff any continuous component lies outside [0,9]. Throws on non-finite input.
std::pair<GridCoord, bool> quantize(const Vec2& continuous);

/// Encodes a target's BEV position relative to two anchors.
///
/// The anchor pair fixes the local grid frame: cell size s = |pb - pa| / 2,
/// +v direction from B toward A, +u = +v rotated -90 degrees in the BEV plane
/// (so (u, v) is positively oriented). Anchor A sits at (5,5), B at (5,3).
/// Throws Error when the anchors are closer than kDegenerateEps or ids repeat.
LocalCogMap encode_triplet(const Vec2& pa, const Vec2& pb, const Vec2& pt,
                           const std::string& id_a, const std::string& id_b,
                           const std::string& id_t);

/// Inverse of the encode frame construction: recovers the target's BEV point
/// from the grid cell (or the continuous coordinates when use_continuous).
Vec2 decode_target(const LocalCogMap& lcm, const Vec2& pa, const Vec2& pb,
                   bool use_continuous = false);

}  // namespace scaffold
