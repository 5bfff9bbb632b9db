#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "scaffold/scene.hpp"

namespace testsup {

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

inline std::string padded_id(const char* prefix, size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s%03zu", prefix, i);
    return buf;
}

inline scaffold::ObjectRecord make_object(const std::string& id, const std::string& category,
                                          scaffold::Vec3 center,
                                          scaffold::Size3 size = {1.0, 1.0, 1.0},
                                          double yaw = 0.0) {
    scaffold::ObjectRecord obj;
    obj.id = id;
    obj.category = category;
    obj.box.center = center;
    obj.box.size = size;
    obj.box.rotation = scaffold::Mat3::rotation_z(yaw);
    return obj;
}

// n objects placed uniformly in a BEV disc of the given diameter, z in [0, 2],
// random yaws and positive sizes. Deterministic in the seed.
inline scaffold::Scene random_scene(uint64_t seed, size_t n, double diameter = 10.0) {
    std::mt19937_64 rng(seed);
    scaffold::Scene scene;
    scene.scene_id = "random_" + std::to_string(seed);
    const double radius = diameter / 2.0;
    for (size_t i = 0; i < n; ++i) {
        double x, y;
        do {
            x = uniform(rng, -radius, radius);
            y = uniform(rng, -radius, radius);
        } while (x * x + y * y > radius * radius);
        const double z = uniform(rng, 0.0, 2.0);
        scaffold::Size3 size{uniform(rng, 0.2, 1.5), uniform(rng, 0.2, 1.5),
                             uniform(rng, 0.2, 1.5)};
        const double yaw = uniform(rng, -M_PI, M_PI);
        scene.objects.push_back(make_object(padded_id("obj_", i),
                                            "cat_" + std::to_string(i % 4), {x, y, z}, size,
                                            yaw));
        scene.objects.back().first_frame = static_cast<int>(i * 7 + (seed % 5));
    }
    return scene;
}

inline std::map<std::string, scaffold::Vec2> random_layout(uint64_t seed, size_t n,
                                                           double diameter = 10.0) {
    const scaffold::Scene scene = random_scene(seed, n, diameter);
    std::map<std::string, scaffold::Vec2> layout;
    for (const auto& obj : scene.objects) layout[obj.id] = obj.box.center.xy();
    return layout;
}

// Two triangles of three objects each, 50 m apart. With delta = 3 the seed
// triplet fits inside the first cluster and the bridge map runs off the grid.
inline scaffold::Scene two_cluster_scene() {
    scaffold::Scene scene;
    scene.scene_id = "two_cluster";
    scene.objects = {
        make_object("a0", "box", {0.0, 0.0, 0.0}),
        make_object("a1", "box", {0.0, -2.0, 0.0}),
        make_object("a2", "box", {2.0, -2.0, 0.0}),
        make_object("b0", "box", {50.0, 0.0, 0.0}),
        make_object("b1", "box", {50.0, -2.0, 0.0}),
        make_object("b2", "box", {52.0, -2.0, 0.0}),
    };
    return scene;
}

// Camera-to-world rotation with the optical axis (camera +z) along `forward`,
// for a level camera in a z-up world.
inline scaffold::Mat3 camera_facing(const scaffold::Vec3& forward) {
    const scaffold::Vec3 up{0.0, 0.0, 1.0};
    const scaffold::Vec3 f = forward * (1.0 / forward.norm());
    const scaffold::Vec3 right = f.cross(up);  // camera x
    scaffold::Vec3 r = right * (1.0 / right.norm());
    const scaffold::Vec3 down = f.cross(r);  // camera y
    scaffold::Mat3 m;
    m.m = {r.x, down.x, f.x, r.y, down.y, f.y, r.z, down.z, f.z};
    return m;
}

inline scaffold::CameraFrame camera_at(const scaffold::Vec3& position,
                                       const scaffold::Vec3& forward, int index = 0) {
    scaffold::CameraFrame cam;
    cam.index = index;
    cam.translation = position;
    cam.rotation = camera_facing(forward);
    return cam;
}

}  // namespace testsup
