#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "scaffold/cogmap.hpp"
#include "scaffold/scene.hpp"

namespace scaffold {

/// An ordered chain of LocalCogMaps spanning a scene. The first map introduces
/// three objects; every later map's anchors appear earlier in placement_order
/// and its target does not. |lcms| = N - 2 for N objects.
struct SceneGraph {
    std::string scene_id;
    double delta = 0.0;  // distance threshold used, meters
    std::vector<std::string> placement_order;
    std::vector<LocalCogMap> lcms;
};

/// Structural health of a LocalCogMap set over an object universe.
struct ValidationReport {
    bool connected = false;
    bool rigid = false;
    std::vector<std::vector<std::string>> components;  // sorted ids, sorted by first member
    std::optional<size_t> stalled_at;                  // first never-applied map, best seed
};

/// BEV positions of the scene's box centers, parallel to scene.objects.
/// Uses the unified frame's (x, y) when a trajectory is present, source (x, y)
/// otherwise. Grid encodings are invariant under BEV similarity transforms, so
/// the frame choice cannot change any LocalCogMap.
std::vector<Vec2> bev_centers(const Scene& scene);

/// Incremental generation: seed with the first triplet (lexicographic id
/// order) whose max pairwise center distance is <= delta, then repeatedly
/// attach the outside object nearest to the placed set, anchored on the placed
/// pair minimizing the distance sum (ties by id). When no triplet satisfies
/// delta, falls back to the triplet minimizing the max pairwise distance.
/// Requires >= 3 objects and delta > 0.
SceneGraph build_incremental(const Scene& scene, double delta);

/// All object triplets (lexicographic id order) whose max pairwise center
/// distance is <= delta; anchors are the two lexicographically smallest ids.
/// O(N^3); guarded against N > 200.
std::vector<LocalCogMap> exhaustive_triplets(const Scene& scene, double delta);

/// k triplets drawn uniformly without replacement from all C(N,3), or all of
/// them when k >= C(N,3). Seed-deterministic across platforms.
std::vector<LocalCogMap> sample_random_triplets(const Scene& scene, size_t k,
                                                uint64_t seed);

/// Checks connectivity (the id-triples span object_ids in one component) and
/// rigidity (some seed map, with its three ids placed, lets iterative
/// two-anchor placement reach every id; a map applies when both anchors are
/// placed, placing its target). stalled_at reports the first map never applied
/// under the best seed when not rigid.
ValidationReport validate(const std::vector<LocalCogMap>& lcms,
                          const std::set<std::string>& object_ids);

/// validate() over the graph's own placement_order ids.
ValidationReport validate(const SceneGraph& graph);

/// Places the first map's anchors at (0,0) and (0,-2) (one grid cell = 1 m),
/// then decodes every map in order from already-placed anchors. The result is
/// the scene layout up to one global similarity transform. Throws on non-rigid
/// graphs or when a map's anchors are not yet placed.
std::map<std::string, Vec2> reconstruct(const SceneGraph& graph, bool use_continuous);

/// Direct similarity transform of the BEV plane: p -> scale * R(rotation) * p + translation.
struct Similarity2D {
    double scale = 1.0;
    double rotation = 0.0;  // radians
    Vec2 translation;

    Vec2 apply(const Vec2& p) const;
};

struct ProcrustesResult {
    Similarity2D transform;
    double rms_residual = 0.0;
};

/// Least-squares similarity (uniform scale + rotation + translation, no
/// reflection) mapping layout_a onto layout_b, with the RMS residual. Requires
/// identical id sets of size >= 2 and non-degenerate layouts.
ProcrustesResult procrustes_align(const std::map<std::string, Vec2>& layout_a,
                                  const std::map<std::string, Vec2>& layout_b);

/// Graph document: {scene_id, delta, placement_order[], lcms[]}. Parsing is
/// structural only, so hand-built (possibly non-rigid) graphs load fine; use
/// check_graph for the chain invariants.
std::string serialize_graph(const SceneGraph& graph);
SceneGraph parse_graph(const std::string& text);

/// Validates the SceneGraph chain invariants (seed introduces 3 ids, later
/// anchors placed earlier, every object exactly once); throws Error on
/// violation. Holds for every build_incremental output.
void check_graph(const SceneGraph& graph);

nlohmann::json lcm_to_json(const LocalCogMap& lcm);
LocalCogMap lcm_from_json(const nlohmann::json& j);
nlohmann::json report_to_json(const ValidationReport& report);

}  // namespace scaffold
