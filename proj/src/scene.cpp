#include "scaffold/scene.hpp"

#include <cmath>
#include <unordered_set>

#include "json.hpp"

namespace scaffold {

using nlohmann::json;

Mat3 Mat3::rotation_z(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    r.m = {c, -s, 0, s, c, 0, 0, 0, 1};
    return r;
}

Mat3 Mat3::rotation_y(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    r.m = {c, 0, s, 0, 1, 0, -s, 0, c};
    return r;
}

Mat3 Mat3::rotation_x(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    r.m = {1, 0, 0, 0, c, -s, 0, s, c};
    return r;
}

Mat3 Mat3::from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
    Mat3 r;
    r.m = {r0.x, r0.y, r0.z, r1.x, r1.y, r1.z, r2.x, r2.y, r2.z};
    return r;
}

Vec3 Mat3::operator*(const Vec3& v) const {
    return {at(0, 0) * v.x + at(0, 1) * v.y + at(0, 2) * v.z,
            at(1, 0) * v.x + at(1, 1) * v.y + at(1, 2) * v.z,
            at(2, 0) * v.x + at(2, 1) * v.y + at(2, 2) * v.z};
}

Mat3 Mat3::operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) acc += at(i, k) * o.at(k, j);
            r.at(i, j) = acc;
        }
    }
    return r;
}

Mat3 Mat3::transposed() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r.at(i, j) = at(j, i);
    return r;
}

double Mat3::determinant() const {
    return at(0, 0) * (at(1, 1) * at(2, 2) - at(1, 2) * at(2, 1)) -
           at(0, 1) * (at(1, 0) * at(2, 2) - at(1, 2) * at(2, 0)) +
           at(0, 2) * (at(1, 0) * at(2, 1) - at(1, 1) * at(2, 0));
}

bool Mat3::is_rotation(double tol) const {
    const Mat3 gram = transposed() * (*this);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double expect = i == j ? 1.0 : 0.0;
            if (std::abs(gram.at(i, j) - expect) > tol) return false;
        }
    }
    return std::abs(determinant() - 1.0) <= tol;
}

const ObjectRecord* Scene::find(const std::string& id) const {
    for (const auto& obj : objects)
        if (obj.id == id) return &obj;
    return nullptr;
}

const ObjectRecord& Scene::at(const std::string& id) const {
    const ObjectRecord* obj = find(id);
    if (!obj) throw Error("scene '" + scene_id + "': unknown object id '" + id + "'");
    return *obj;
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw Error(where + ": " + what);
}

Vec3 get_vec3(const json& j, const std::string& where, const std::string& key) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != 3)
        fail(where, "field '" + key + "' must be an array of 3 reals");
    Vec3 v;
    double* comps[3] = {&v.x, &v.y, &v.z};
    for (size_t i = 0; i < 3; ++i) {
        if (!j[key][i].is_number()) fail(where, "non-numeric component in '" + key + "'");
        *comps[i] = j[key][i].get<double>();
    }
    if (!v.finite()) fail(where, "non-finite component in '" + key + "'");
    return v;
}

Mat3 get_mat3(const json& j, const std::string& where, const std::string& key) {
    if (!j.contains(key) || !j[key].is_array() || j[key].size() != 9)
        fail(where, "field '" + key + "' must be an array of 9 row-major reals");
    Mat3 m;
    for (size_t i = 0; i < 9; ++i) {
        if (!j[key][i].is_number()) fail(where, "non-numeric component in '" + key + "'");
        m.m[i] = j[key][i].get<double>();
        if (!std::isfinite(m.m[i])) fail(where, "non-finite component in '" + key + "'");
    }
    return m;
}

std::string get_string(const json& j, const std::string& where, const std::string& key) {
    if (!j.contains(key) || !j[key].is_string()) fail(where, "missing or non-string field '" + key + "'");
    return j[key].get<std::string>();
}

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }
json mat3_json(const Mat3& m) { return json(m.m); }

}  // namespace

Scene parse_scene(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(std::string("scene: malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) fail("scene", "top level must be an object");

    Scene scene;
    scene.scene_id = get_string(doc, "scene", "scene_id");
    if (!doc.contains("objects") || !doc["objects"].is_array())
        fail("scene '" + scene.scene_id + "'", "missing 'objects' array");

    size_t idx = 0;
    for (const auto& jo : doc["objects"]) {
        const std::string slot = "objects[" + std::to_string(idx) + "]";
        if (!jo.is_object()) fail(slot, "must be an object");
        ObjectRecord obj;
        obj.id = get_string(jo, slot, "id");
        const std::string where = slot + " (id '" + obj.id + "')";
        obj.category = get_string(jo, where, "category");
        obj.box.center = get_vec3(jo, where, "center");
        const Vec3 sz = get_vec3(jo, where, "size");
        obj.box.size = {sz.x, sz.y, sz.z};
        obj.box.rotation = get_mat3(jo, where, "rotation");
        if (jo.contains("first_frame")) {
            if (!jo["first_frame"].is_number_integer())
                fail(where, "field 'first_frame' must be an integer");
            obj.first_frame = jo["first_frame"].get<int>();
        }
        scene.objects.push_back(std::move(obj));
        ++idx;
    }

    if (doc.contains("trajectory")) {
        if (!doc["trajectory"].is_array()) fail("scene", "'trajectory' must be an array");
        size_t ci = 0;
        for (const auto& jc : doc["trajectory"]) {
            const std::string where = "trajectory[" + std::to_string(ci) + "]";
            if (!jc.is_object()) fail(where, "must be an object");
            CameraFrame cam;
            if (!jc.contains("index") || !jc["index"].is_number_integer())
                fail(where, "missing integer field 'index'");
            cam.index = jc["index"].get<int>();
            cam.rotation = get_mat3(jc, where, "rotation");
            cam.translation = get_vec3(jc, where, "translation");
            scene.trajectory.push_back(cam);
            ++ci;
        }
    }

    check_scene(scene);
    return scene;
}

void check_scene(const Scene& scene) {
    if (scene.objects.empty()) fail("scene '" + scene.scene_id + "'", "must contain at least one object");

    std::unordered_set<std::string> seen;
    for (size_t i = 0; i < scene.objects.size(); ++i) {
        const auto& obj = scene.objects[i];
        const std::string where = "objects[" + std::to_string(i) + "] (id '" + obj.id + "')";
        if (obj.id.empty()) fail(where, "empty id");
        if (!seen.insert(obj.id).second) fail(where, "duplicate id '" + obj.id + "'");
        if (obj.category.empty()) fail(where, "empty category");
        if (!obj.box.center.finite()) fail(where, "non-finite center");
        if (!(obj.box.size.l > 0.0) || !(obj.box.size.w > 0.0) || !(obj.box.size.h > 0.0))
            fail(where, "size components must be > 0");
        if (!obj.box.rotation.is_rotation())
            fail(where, "rotation is not orthonormal with determinant +1");
        if (obj.first_frame && *obj.first_frame < 0) fail(where, "first_frame must be >= 0");
    }

    int last_index = -1;
    for (size_t i = 0; i < scene.trajectory.size(); ++i) {
        const auto& cam = scene.trajectory[i];
        const std::string where = "trajectory[" + std::to_string(i) + "]";
        if (cam.index < 0) fail(where, "index must be >= 0");
        if (cam.index <= last_index) fail(where, "indices must be strictly increasing");
        last_index = cam.index;
        if (!cam.rotation.is_rotation()) fail(where, "rotation is not orthonormal with determinant +1");
        if (!cam.translation.finite()) fail(where, "non-finite translation");
    }
}

std::string serialize_scene(const Scene& scene) {
    json doc;
    doc["scene_id"] = scene.scene_id;
    doc["objects"] = json::array();
    for (const auto& obj : scene.objects) {
        json jo;
        jo["id"] = obj.id;
        jo["category"] = obj.category;
        jo["center"] = vec3_json(obj.box.center);
        jo["size"] = json::array({obj.box.size.l, obj.box.size.w, obj.box.size.h});
        jo["rotation"] = mat3_json(obj.box.rotation);
        if (obj.first_frame) jo["first_frame"] = *obj.first_frame;
        doc["objects"].push_back(std::move(jo));
    }
    if (!scene.trajectory.empty()) {
        doc["trajectory"] = json::array();
        for (const auto& cam : scene.trajectory) {
            json jc;
            jc["index"] = cam.index;
            jc["rotation"] = mat3_json(cam.rotation);
            jc["translation"] = vec3_json(cam.translation);
            doc["trajectory"].push_back(std::move(jc));
        }
    }
    return doc.dump(2) + "\n";
}

double center_distance(const ObjectRecord& a, const ObjectRecord& b) {
    return (a.box.center - b.box.center).norm();
}

}  // namespace scaffold
