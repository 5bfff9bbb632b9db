#include "scaffold/cogmap.hpp"

#include <algorithm>
#include <cmath>

namespace scaffold {

std::pair<GridCoord, bool> quantize(const Vec2& continuous) {
    if (!std::isfinite(continuous.x) || !std::isfinite(continuous.y))
        throw Error("quantize: non-finite grid coordinates");
    const bool outside = continuous.x < 0.0 || continuous.x > 9.0 || continuous.y < 0.0 ||
                         continuous.y > 9.0;
    const auto snap = [](double c) {
        const double r = std::round(c);  // half away from zero
        return static_cast<int>(std::clamp(r, 0.0, 9.0));
    };
    return {GridCoord{snap(continuous.x), snap(continuous.y)}, outside};
}

namespace {

struct TripletFrame {
    Vec2 u_hat;
    Vec2 v_hat;
    double cell;  // meters per grid cell
};

TripletFrame anchor_frame(const Vec2& pa, const Vec2& pb) {
    const Vec2 b_to_a = pa - pb;
    const double sep = b_to_a.norm();
    if (sep < kDegenerateEps) throw Error("cogmap: coincident anchors");
    TripletFrame f;
    f.v_hat = b_to_a * (1.0 / sep);
    f.u_hat = {f.v_hat.y, -f.v_hat.x};  // v rotated -90 degrees
    f.cell = sep / 2.0;                 // anchors sit two cells apart
    return f;
}

}  // namespace

LocalCogMap encode_triplet(const Vec2& pa, const Vec2& pb, const Vec2& pt,
                           const std::string& id_a, const std::string& id_b,
                           const std::string& id_t) {
    if (id_a == id_b || id_a == id_t || id_b == id_t)
        throw Error("cogmap: triplet ids must be pairwise distinct");
    const TripletFrame f = anchor_frame(pa, pb);
    const Vec2 rel = pt - pa;
    LocalCogMap lcm;
    lcm.anchor_a_id = id_a;
    lcm.anchor_b_id = id_b;
    lcm.target_id = id_t;
    lcm.target_grid_continuous = {kAnchorACell.u + rel.dot(f.u_hat) / f.cell,
                                  kAnchorACell.v + rel.dot(f.v_hat) / f.cell};
    const auto [grid, outside] = quantize(lcm.target_grid_continuous);
    lcm.target_grid = grid;
    lcm.out_of_grid = outside;
    return lcm;
}

Vec2 decode_target(const LocalCogMap& lcm, const Vec2& pa, const Vec2& pb,
                   bool use_continuous) {
    const TripletFrame f = anchor_frame(pa, pb);
    const double du = (use_continuous ? lcm.target_grid_continuous.x
                                      : static_cast<double>(lcm.target_grid.u)) -
                      kAnchorACell.u;
    const double dv = (use_continuous ? lcm.target_grid_continuous.y
                                      : static_cast<double>(lcm.target_grid.v)) -
                      kAnchorACell.v;
    return pa + f.u_hat * (du * f.cell) + f.v_hat * (dv * f.cell);
}

}  // namespace scaffold
