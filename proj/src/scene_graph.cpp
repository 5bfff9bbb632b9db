#include "scaffold/scene_graph.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include "json.hpp"
#include "scaffold/geometry.hpp"
#include "scaffold/log.hpp"

namespace scaffold {

using nlohmann::json;

std::vector<Vec2> bev_centers(const Scene& scene) {
    std::vector<Vec2> out;
    out.reserve(scene.objects.size());
    if (!scene.trajectory.empty()) {
        try {
            const UnifiedFrame frame = scene_unified_frame(scene);
            for (const auto& obj : scene.objects)
                out.push_back(transform_point(frame, obj.box.center).xy());
            return out;
        } catch (const Error& e) {
            // Grid encodings are invariant under the BEV rigid motion the frame
            // would apply, so source coordinates give identical maps.
            log_warn(std::string("bev_centers: ") + e.what() + "; using source coordinates");
        }
    }
    for (const auto& obj : scene.objects) out.push_back(obj.box.center.xy());
    return out;
}

namespace {

// Indices of scene objects sorted by id.
std::vector<size_t> sorted_by_id(const Scene& scene) {
    std::vector<size_t> order(scene.objects.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return scene.objects[a].id < scene.objects[b].id;
    });
    return order;
}

struct DistanceTable {
    size_t n = 0;
    std::vector<double> d;  // n x n

    explicit DistanceTable(const Scene& scene) : n(scene.objects.size()), d(n * n, 0.0) {
        for (size_t i = 0; i < n; ++i)
            for (size_t j = i + 1; j < n; ++j)
                d[i * n + j] = d[j * n + i] =
                    center_distance(scene.objects[i], scene.objects[j]);
    }
    double operator()(size_t i, size_t j) const { return d[i * n + j]; }
};

double triplet_diameter(const DistanceTable& dist, size_t a, size_t b, size_t c) {
    return std::max({dist(a, b), dist(a, c), dist(b, c)});
}

bool bev_separated(const std::vector<Vec2>& bev, size_t a, size_t b) {
    return (bev[a] - bev[b]).norm() >= kDegenerateEps;
}

// Encodes a triplet given by scene indices; anchors a then b, target t.
LocalCogMap encode_indices(const Scene& scene, const std::vector<Vec2>& bev, size_t a,
                           size_t b, size_t t) {
    return encode_triplet(bev[a], bev[b], bev[t], scene.objects[a].id,
                          scene.objects[b].id, scene.objects[t].id);
}

uint64_t comb2(uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }
uint64_t comb3(uint64_t n) { return n < 3 ? 0 : n * (n - 1) / 2 * (n - 2) / 3; }

// Unbiased uniform draw in [0, n).
uint64_t uniform_below(std::mt19937_64& rng, uint64_t n) {
    if (n == 0) throw Error("uniform_below: empty range");
    const uint64_t rem = (std::numeric_limits<uint64_t>::max() % n + 1) % n;  // 2^64 mod n
    if (rem == 0) return rng() % n;
    const uint64_t cutoff = std::numeric_limits<uint64_t>::max() - rem;  // accept x <= cutoff
    for (;;) {
        const uint64_t x = rng();
        if (x <= cutoff) return x % n;
    }
}

// Lexicographic rank -> combination (i < j < k) over [0, n).
std::array<size_t, 3> unrank_triplet(uint64_t rank, size_t n) {
    size_t i = 0;
    while (rank >= comb2(n - 1 - i)) {
        rank -= comb2(n - 1 - i);
        ++i;
    }
    size_t j = i + 1;
    while (rank >= n - 1 - j) {
        rank -= n - 1 - j;
        ++j;
    }
    const size_t k = j + 1 + static_cast<size_t>(rank);
    return {i, j, k};
}

struct UnionFind {
    std::vector<size_t> parent;

    explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), size_t{0}); }
    size_t find(size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(size_t a, size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

SceneGraph build_incremental(const Scene& scene, double delta) {
    const size_t n = scene.objects.size();
    if (n < 3) throw Error("scene '" + scene.scene_id + "': fewer than 3 objects");
    if (!(delta > 0.0)) throw Error("delta must be > 0");

    const std::vector<Vec2> bev = bev_centers(scene);
    const DistanceTable dist(scene);
    const std::vector<size_t> order = sorted_by_id(scene);

    // Seed triplet: first in lexicographic id order within the threshold; if
    // none qualifies, the triplet with the smallest diameter. Anchors are the
    // two smaller ids and must be separated in the BEV plane.
    bool found = false;
    std::array<size_t, 3> seed{};
    double best_diameter = std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < n && !found; ++a) {
        for (size_t b = a + 1; b < n && !found; ++b) {
            if (!bev_separated(bev, order[a], order[b])) continue;
            for (size_t c = b + 1; c < n; ++c) {
                const double diam = triplet_diameter(dist, order[a], order[b], order[c]);
                if (diam <= delta) {
                    seed = {order[a], order[b], order[c]};
                    found = true;
                    break;
                }
                if (diam < best_diameter) {
                    best_diameter = diam;
                    seed = {order[a], order[b], order[c]};
                }
            }
        }
    }
    if (!found && !std::isfinite(best_diameter))
        throw Error("scene '" + scene.scene_id + "': no BEV-separated anchor pair exists");

    SceneGraph graph;
    graph.scene_id = scene.scene_id;
    graph.delta = delta;
    graph.lcms.push_back(encode_indices(scene, bev, seed[0], seed[1], seed[2]));
    graph.placement_order = {scene.objects[seed[0]].id, scene.objects[seed[1]].id,
                             scene.objects[seed[2]].id};

    std::vector<size_t> placed = {seed[0], seed[1], seed[2]};
    std::sort(placed.begin(), placed.end(), [&](size_t a, size_t b) {
        return scene.objects[a].id < scene.objects[b].id;
    });
    std::vector<bool> in(n, false);
    for (size_t idx : placed) in[idx] = true;

    size_t remaining = n - 3;
    while (remaining > 0) {
        // Outside object nearest to the placed set; ties by id.
        size_t pick = n;
        double pick_dist = std::numeric_limits<double>::infinity();
        for (size_t oi : order) {
            if (in[oi]) continue;
            double nearest = std::numeric_limits<double>::infinity();
            for (size_t pi : placed) nearest = std::min(nearest, dist(oi, pi));
            if (nearest < pick_dist) {
                pick_dist = nearest;
                pick = oi;
            }
        }

        // Placed anchor pair minimizing the distance sum; ties by id pair.
        size_t a1 = n, a2 = n;
        double best_sum = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < placed.size(); ++i) {
            for (size_t j = i + 1; j < placed.size(); ++j) {
                if (!bev_separated(bev, placed[i], placed[j])) continue;
                const double sum = dist(pick, placed[i]) + dist(pick, placed[j]);
                if (sum < best_sum) {
                    best_sum = sum;
                    a1 = placed[i];
                    a2 = placed[j];
                }
            }
        }
        if (a1 == n)
            throw Error("scene '" + scene.scene_id +
                        "': no BEV-separated anchor pair among placed objects");

        graph.lcms.push_back(encode_indices(scene, bev, a1, a2, pick));
        graph.placement_order.push_back(scene.objects[pick].id);
        in[pick] = true;
        placed.insert(std::upper_bound(placed.begin(), placed.end(), pick,
                                       [&](size_t a, size_t b) {
                                           return scene.objects[a].id < scene.objects[b].id;
                                       }),
                      pick);
        --remaining;
    }
    check_graph(graph);
    return graph;
}

std::vector<LocalCogMap> exhaustive_triplets(const Scene& scene, double delta) {
    const size_t n = scene.objects.size();
    if (n < 3) throw Error("scene '" + scene.scene_id + "': fewer than 3 objects");
    if (n > 200) throw Error("exhaustive_triplets: instance too large (N > 200)");

    const std::vector<Vec2> bev = bev_centers(scene);
    const DistanceTable dist(scene);
    const std::vector<size_t> order = sorted_by_id(scene);

    std::vector<LocalCogMap> out;
    for (size_t a = 0; a < n; ++a) {
        for (size_t b = a + 1; b < n; ++b) {
            for (size_t c = b + 1; c < n; ++c) {
                const size_t ia = order[a], ib = order[b], ic = order[c];
                if (triplet_diameter(dist, ia, ib, ic) > delta) continue;
                // Anchors default to the two smallest ids; fall back to the
                // first separated pair when those coincide in the BEV plane.
                const std::array<std::array<size_t, 3>, 3> roles{
                    {{ia, ib, ic}, {ia, ic, ib}, {ib, ic, ia}}};
                bool emitted = false;
                for (const auto& r : roles) {
                    if (!bev_separated(bev, r[0], r[1])) continue;
                    out.push_back(encode_indices(scene, bev, r[0], r[1], r[2]));
                    emitted = true;
                    break;
                }
                if (!emitted)
                    log_debug("exhaustive_triplets: skipping fully coincident triplet at '" +
                              scene.objects[ia].id + "'");
            }
        }
    }
    return out;
}

std::vector<LocalCogMap> sample_random_triplets(const Scene& scene, size_t k,
                                                uint64_t seed) {
    const size_t n = scene.objects.size();
    if (n < 3) throw Error("scene '" + scene.scene_id + "': fewer than 3 objects");
    if (k < 1) throw Error("sample_random_triplets: k must be >= 1");

    const uint64_t total = comb3(n);
    if (k >= total) return exhaustive_triplets(scene, std::numeric_limits<double>::infinity());

    std::mt19937_64 rng(seed);
    // Floyd's sampling: k distinct ranks out of [0, total).
    std::set<uint64_t> ranks;
    for (uint64_t j = total - k; j < total; ++j) {
        const uint64_t t = uniform_below(rng, j + 1);
        if (!ranks.insert(t).second) ranks.insert(j);
    }

    const std::vector<Vec2> bev = bev_centers(scene);
    const std::vector<size_t> order = sorted_by_id(scene);
    std::vector<LocalCogMap> out;
    out.reserve(ranks.size());
    for (uint64_t rank : ranks) {
        const auto [a, b, c] = unrank_triplet(rank, n);
        const size_t ia = order[a], ib = order[b], ic = order[c];
        const std::array<std::array<size_t, 3>, 3> roles{
            {{ia, ib, ic}, {ia, ic, ib}, {ib, ic, ia}}};
        for (const auto& r : roles) {
            if (!bev_separated(bev, r[0], r[1])) continue;
            out.push_back(encode_indices(scene, bev, r[0], r[1], r[2]));
            break;
        }
    }
    return out;
}

ValidationReport validate(const std::vector<LocalCogMap>& lcms,
                          const std::set<std::string>& object_ids) {
    if (object_ids.empty()) throw Error("validate: empty object id set");

    std::unordered_map<std::string, size_t> index;
    std::vector<std::string> ids(object_ids.begin(), object_ids.end());
    for (size_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;

    const auto id_index = [&](const std::string& id) {
        const auto it = index.find(id);
        if (it == index.end()) throw Error("validate: unknown object id '" + id + "'");
        return it->second;
    };

    struct Edge {
        size_t a, b, t;
    };
    std::vector<Edge> edges;
    edges.reserve(lcms.size());
    for (const auto& lcm : lcms)
        edges.push_back({id_index(lcm.anchor_a_id), id_index(lcm.anchor_b_id),
                         id_index(lcm.target_id)});

    ValidationReport report;

    // Connectivity of the hypergraph whose hyperedges are the id triples.
    UnionFind uf(ids.size());
    for (const auto& e : edges) {
        uf.unite(e.a, e.b);
        uf.unite(e.a, e.t);
    }
    std::map<size_t, std::vector<std::string>> groups;
    for (size_t i = 0; i < ids.size(); ++i) groups[uf.find(i)].push_back(ids[i]);
    for (auto& [root, members] : groups) {
        std::sort(members.begin(), members.end());
        report.components.push_back(std::move(members));
    }
    std::sort(report.components.begin(), report.components.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    report.connected = report.components.size() == 1;

    // Rigidity: iterative two-anchor placement from every seed map.
    size_t best_reached = 0;
    std::vector<bool> best_applied;
    for (size_t s = 0; s < edges.size(); ++s) {
        if (edges[s].a == edges[s].b || edges[s].a == edges[s].t || edges[s].b == edges[s].t)
            continue;  // malformed map cannot seed
        std::vector<bool> placed_flag(ids.size(), false);
        std::vector<bool> applied(edges.size(), false);
        placed_flag[edges[s].a] = placed_flag[edges[s].b] = placed_flag[edges[s].t] = true;
        applied[s] = true;
        size_t reached = 3;
        bool progress = true;
        while (progress) {
            progress = false;
            for (size_t t = 0; t < edges.size(); ++t) {
                if (applied[t]) continue;
                if (placed_flag[edges[t].a] && placed_flag[edges[t].b]) {
                    applied[t] = true;
                    if (!placed_flag[edges[t].t]) {
                        placed_flag[edges[t].t] = true;
                        ++reached;
                    }
                    progress = true;
                }
            }
        }
        if (reached > best_reached) {
            best_reached = reached;
            best_applied = applied;
        }
        if (reached == ids.size()) break;
    }
    report.rigid = best_reached == ids.size() && !edges.empty();
    if (ids.size() == 1 && edges.empty()) report.rigid = true;  // trivially placeable
    if (!report.rigid) {
        for (size_t t = 0; t < best_applied.size(); ++t) {
            if (!best_applied[t]) {
                report.stalled_at = t;
                break;
            }
        }
    }
    return report;
}

ValidationReport validate(const SceneGraph& graph) {
    return validate(graph.lcms,
                    std::set<std::string>(graph.placement_order.begin(),
                                          graph.placement_order.end()));
}

std::map<std::string, Vec2> reconstruct(const SceneGraph& graph, bool use_continuous) {
    if (graph.lcms.empty()) throw Error("reconstruct: empty graph");
    const ValidationReport report = validate(graph);
    if (!report.rigid) {
        std::string msg = "reconstruct: graph is not rigid";
        if (report.stalled_at) msg += " (stalled at map " + std::to_string(*report.stalled_at) + ")";
        throw Error(msg);
    }

    std::map<std::string, Vec2> positions;
    const LocalCogMap& seed = graph.lcms.front();
    const Vec2 pa{0.0, 0.0};
    const Vec2 pb{0.0, -2.0};  // one grid cell = 1 m
    positions[seed.anchor_a_id] = pa;
    positions[seed.anchor_b_id] = pb;
    positions[seed.target_id] = decode_target(seed, pa, pb, use_continuous);

    for (size_t i = 1; i < graph.lcms.size(); ++i) {
        const LocalCogMap& lcm = graph.lcms[i];
        const auto ia = positions.find(lcm.anchor_a_id);
        const auto ib = positions.find(lcm.anchor_b_id);
        if (ia == positions.end() || ib == positions.end())
            throw Error("reconstruct: anchors of map " + std::to_string(i) +
                        " not placed yet");
        if ((ia->second - ib->second).norm() < kDegenerateEps) {
            // Quantization can collapse two placed anchors onto one cell. The
            // decode formula scales every offset by half the anchor distance,
            // so its limit places the target on the collapsed point.
            positions[lcm.target_id] = ia->second;
            continue;
        }
        positions[lcm.target_id] = decode_target(lcm, ia->second, ib->second, use_continuous);
    }
    return positions;
}

Vec2 Similarity2D::apply(const Vec2& p) const {
    const double c = std::cos(rotation), s = std::sin(rotation);
    return {scale * (c * p.x - s * p.y) + translation.x,
            scale * (s * p.x + c * p.y) + translation.y};
}

ProcrustesResult procrustes_align(const std::map<std::string, Vec2>& layout_a,
                                  const std::map<std::string, Vec2>& layout_b) {
    if (layout_a.size() != layout_b.size() || layout_a.size() < 2)
        throw Error("procrustes_align: layouts must share >= 2 ids");
    using Cx = std::complex<double>;
    std::vector<Cx> a, b;
    a.reserve(layout_a.size());
    b.reserve(layout_b.size());
    for (const auto& [id, pa] : layout_a) {
        const auto it = layout_b.find(id);
        if (it == layout_b.end()) throw Error("procrustes_align: id '" + id + "' missing from layout_b");
        a.emplace_back(pa.x, pa.y);
        b.emplace_back(it->second.x, it->second.y);
    }

    const auto mean = [](const std::vector<Cx>& v) {
        Cx s{0.0, 0.0};
        for (const Cx& x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    const Cx mu_a = mean(a), mu_b = mean(b);

    double var_a = 0.0, var_b = 0.0;
    Cx cross{0.0, 0.0};
    for (size_t i = 0; i < a.size(); ++i) {
        const Cx da = a[i] - mu_a, db = b[i] - mu_b;
        var_a += std::norm(da);
        var_b += std::norm(db);
        cross += std::conj(da) * db;
    }
    if (var_a < 1e-24 || var_b < 1e-24)
        throw Error("procrustes_align: degenerate layout (zero variance)");

    // Least-squares orientation-preserving similarity in the complex plane.
    const Cx z = cross / var_a;
    double ss = 0.0;
    for (size_t i = 0; i < a.size(); ++i) ss += std::norm(z * (a[i] - mu_a) - (b[i] - mu_b));

    const Cx t = mu_b - z * mu_a;
    ProcrustesResult result;
    result.transform.scale = std::abs(z);
    result.transform.rotation = std::arg(z);
    result.transform.translation = {t.real(), t.imag()};
    result.rms_residual = std::sqrt(ss / static_cast<double>(a.size()));
    return result;
}

json lcm_to_json(const LocalCogMap& lcm) {
    json j;
    j["anchor_a"] = lcm.anchor_a_id;
    j["anchor_b"] = lcm.anchor_b_id;
    j["target"] = lcm.target_id;
    j["target_grid"] = json::array({lcm.target_grid.u, lcm.target_grid.v});
    j["target_grid_continuous"] =
        json::array({lcm.target_grid_continuous.x, lcm.target_grid_continuous.y});
    j["out_of_grid"] = lcm.out_of_grid;
    return j;
}

LocalCogMap lcm_from_json(const json& j) {
    LocalCogMap lcm;
    lcm.anchor_a_id = j.at("anchor_a").get<std::string>();
    lcm.anchor_b_id = j.at("anchor_b").get<std::string>();
    lcm.target_id = j.at("target").get<std::string>();
    lcm.target_grid = {j.at("target_grid").at(0).get<int>(),
                       j.at("target_grid").at(1).get<int>()};
    lcm.target_grid_continuous = {j.at("target_grid_continuous").at(0).get<double>(),
                                  j.at("target_grid_continuous").at(1).get<double>()};
    lcm.out_of_grid = j.at("out_of_grid").get<bool>();
    return lcm;
}

json report_to_json(const ValidationReport& report) {
    json j;
    j["connected"] = report.connected;
    j["rigid"] = report.rigid;
    j["components"] = report.components;
    j["stalled_at"] = report.stalled_at ? json(*report.stalled_at) : json(nullptr);
    return j;
}

void check_graph(const SceneGraph& graph) {
    const size_t n = graph.placement_order.size();
    if (n < 3 || graph.lcms.size() != n - 2)
        throw Error("graph '" + graph.scene_id + "': expected N-2 maps over N >= 3 objects");
    std::set<std::string> placed;
    const auto place = [&](const std::string& id) {
        if (!placed.insert(id).second)
            throw Error("graph '" + graph.scene_id + "': object '" + id + "' placed twice");
    };
    const LocalCogMap& seed = graph.lcms.front();
    place(seed.anchor_a_id);
    place(seed.anchor_b_id);
    place(seed.target_id);
    for (size_t i = 1; i < graph.lcms.size(); ++i) {
        const LocalCogMap& lcm = graph.lcms[i];
        if (!placed.count(lcm.anchor_a_id) || !placed.count(lcm.anchor_b_id))
            throw Error("graph '" + graph.scene_id + "': map " + std::to_string(i) +
                        " uses unplaced anchors");
        place(lcm.target_id);
    }
    for (const auto& id : graph.placement_order)
        if (!placed.count(id))
            throw Error("graph '" + graph.scene_id + "': object '" + id +
                        "' missing from the map chain");
    if (!(graph.delta > 0.0)) throw Error("graph '" + graph.scene_id + "': delta must be > 0");
}

std::string serialize_graph(const SceneGraph& graph) {
    json doc;
    doc["scene_id"] = graph.scene_id;
    doc["delta"] = graph.delta;
    doc["placement_order"] = graph.placement_order;
    doc["lcms"] = json::array();
    for (const auto& lcm : graph.lcms) doc["lcms"].push_back(lcm_to_json(lcm));
    return doc.dump(2) + "\n";
}

SceneGraph parse_graph(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("graph: malformed JSON: ") + e.what());
    }
    SceneGraph graph;
    try {
        graph.scene_id = doc.at("scene_id").get<std::string>();
        graph.delta = doc.at("delta").get<double>();
        graph.placement_order = doc.at("placement_order").get<std::vector<std::string>>();
        for (const auto& j : doc.at("lcms")) graph.lcms.push_back(lcm_from_json(j));
    } catch (const json::exception& e) {
        throw Error(std::string("graph: invalid document: ") + e.what());
    }
    return graph;
}

}  // namespace scaffold
