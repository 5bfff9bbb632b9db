#include "scaffold/qa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "json.hpp"
#include "scaffold/log.hpp"

namespace scaffold {

using nlohmann::json;

namespace {

constexpr const char* kScenegraphTemplateId = "scenegraph_qa.v1";
constexpr const char* kGroundingTemplateId = "grounding_qa.v1";

constexpr const char* kScenegraphContext =
    "You are building a local cognitive map of a scene seen in a video. The map is a "
    "10x10 grid of cells indexed [u, v] with u and v ranging from 0 to 9. Two anchor "
    "objects sit at fixed cells: anchor A at [5, 5] and anchor B at [5, 3]. Infer the "
    "grid cell of the requested target object relative to these anchors and answer "
    "with a single cell formatted as [u, v].";

constexpr const char* kGroundingContext =
    "You are localizing objects from a video in a unified scene coordinate system. "
    "The origin is the optical center of the camera at the first frame; the positive "
    "x-axis is the ground-plane projection of that camera's optical axis; the z-axis "
    "points up; the frame is right-handed. Answer with the target's 7-DoF bounding "
    "box formatted as (x_c, y_c, z_c, l, w, h, yaw) in meters and radians with two "
    "decimals.";

double fixed2(double x) {
    const double r = std::round(x * 100.0) / 100.0;
    return r == 0.0 ? 0.0 : r;  // normalize -0
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

json referral_to_json(const Referral& ref) {
    json j;
    j["kind"] = to_string(ref.kind);
    j["target"] = ref.target_id;
    j["anchors"] = ref.anchor_ids;
    j["qualifier"] = ref.qualifier;
    j["phrase"] = ref.phrase;
    return j;
}

Referral referral_from_json(const json& j) {
    Referral ref;
    ref.kind = referral_kind_from_string(j.at("kind").get<std::string>());
    ref.target_id = j.at("target").get<std::string>();
    ref.anchor_ids = j.at("anchors").get<std::vector<std::string>>();
    ref.qualifier = j.at("qualifier").get<std::string>();
    ref.phrase = j.at("phrase").get<std::string>();
    return ref;
}

json record_to_json(const QARecord& rec) {
    json j;
    j["id"] = rec.record_id();
    j["scene_id"] = rec.scene_id;
    j["task"] = to_string(rec.task);
    j["template_id"] = rec.template_id;
    j["system_context"] = rec.system_context;
    j["question"] = rec.question;
    j["answer"] = rec.answer;
    if (rec.task == QATask::scenegraph_qa) {
        const auto& cell = std::get<GridCoord>(rec.ground_truth);
        j["ground_truth"] = {{"target_grid", json::array({cell.u, cell.v})}};
        j["provenance"] = {{"lcm_index", rec.provenance_index}};
    } else {
        const auto& box = std::get<Box7DoF>(rec.ground_truth);
        j["ground_truth"] = {
            {"center", json::array({box.center.x, box.center.y, box.center.z})},
            {"size", json::array({box.size.l, box.size.w, box.size.h})},
            {"yaw", box.yaw}};
        json prov;
        prov["object_index"] = rec.provenance_index;
        prov["referral"] = rec.referral ? referral_to_json(*rec.referral) : json(nullptr);
        j["provenance"] = std::move(prov);
    }
    return j;
}

QARecord record_from_json(const json& j) {
    QARecord rec;
    rec.scene_id = j.at("scene_id").get<std::string>();
    const std::string task = j.at("task").get<std::string>();
    if (task == "scenegraph_qa")
        rec.task = QATask::scenegraph_qa;
    else if (task == "grounding_qa")
        rec.task = QATask::grounding_qa;
    else
        throw Error("qa record: unknown task '" + task + "'");
    rec.template_id = j.at("template_id").get<std::string>();
    rec.system_context = j.at("system_context").get<std::string>();
    rec.question = j.at("question").get<std::string>();
    rec.answer = j.at("answer").get<std::string>();
    const json& gt = j.at("ground_truth");
    const json& prov = j.at("provenance");
    if (rec.task == QATask::scenegraph_qa) {
        rec.ground_truth = GridCoord{gt.at("target_grid").at(0).get<int>(),
                                     gt.at("target_grid").at(1).get<int>()};
        rec.provenance_index = prov.at("lcm_index").get<size_t>();
    } else {
        Box7DoF box;
        box.center = {gt.at("center").at(0).get<double>(), gt.at("center").at(1).get<double>(),
                      gt.at("center").at(2).get<double>()};
        box.size = {gt.at("size").at(0).get<double>(), gt.at("size").at(1).get<double>(),
                    gt.at("size").at(2).get<double>()};
        box.yaw = gt.at("yaw").get<double>();
        rec.ground_truth = box;
        rec.provenance_index = prov.at("object_index").get<size_t>();
        if (prov.contains("referral") && !prov.at("referral").is_null())
            rec.referral = referral_from_json(prov.at("referral"));
    }
    return rec;
}

}  // namespace

const char* to_string(QATask task) {
    return task == QATask::scenegraph_qa ? "scenegraph_qa" : "grounding_qa";
}

std::string QARecord::record_id() const {
    return scene_id + "/" + to_string(task) + "/" + std::to_string(provenance_index);
}

bool QARecord::operator==(const QARecord& o) const {
    return record_to_json(*this) == record_to_json(o);
}

std::string format_grid_answer(const GridCoord& cell) {
    return "[" + std::to_string(cell.u) + ", " + std::to_string(cell.v) + "]";
}

std::string format_box7_answer(const Box7DoF& box) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "(%.2f, %.2f, %.2f, %.2f, %.2f, %.2f, %.2f)",
                  fixed2(box.center.x), fixed2(box.center.y), fixed2(box.center.z),
                  fixed2(box.size.l), fixed2(box.size.w), fixed2(box.size.h),
                  fixed2(box.yaw));
    return buf;
}

Box7DoF round_box7(const Box7DoF& box) {
    Box7DoF out;
    out.center = {fixed2(box.center.x), fixed2(box.center.y), fixed2(box.center.z)};
    out.size = {fixed2(box.size.l), fixed2(box.size.w), fixed2(box.size.h)};
    out.yaw = fixed2(box.yaw);
    return out;
}

std::vector<QARecord> emit_scenegraph_qa(const SceneGraph& graph, const Scene& scene) {
    if (graph.scene_id != scene.scene_id)
        throw Error("emit_scenegraph_qa: graph '" + graph.scene_id +
                    "' does not belong to scene '" + scene.scene_id + "'");
    const ValidationReport report = validate(graph);
    if (!report.rigid) throw Error("emit_scenegraph_qa: graph is not rigid");

    std::vector<QARecord> records;
    records.reserve(graph.lcms.size());
    for (size_t i = 0; i < graph.lcms.size(); ++i) {
        const LocalCogMap& lcm = graph.lcms[i];
        const ObjectRecord& a = scene.at(lcm.anchor_a_id);
        const ObjectRecord& b = scene.at(lcm.anchor_b_id);
        const ObjectRecord& t = scene.at(lcm.target_id);

        QARecord rec;
        rec.scene_id = graph.scene_id;
        rec.task = QATask::scenegraph_qa;
        rec.template_id = kScenegraphTemplateId;
        rec.system_context = kScenegraphContext;
        rec.question = "Anchor A is the " + a.category + " '" + a.id +
                       "' at [5, 5]. Anchor B is the " + b.category + " '" + b.id +
                       "' at [5, 3]. Which grid cell contains the " + t.category + " '" +
                       t.id + "'?";
        rec.answer = format_grid_answer(lcm.target_grid);
        rec.ground_truth = lcm.target_grid;
        rec.provenance_index = i;
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<QARecord> emit_grounding_qa(const Scene& scene,
                                        const std::vector<ReferralKind>& policy,
                                        uint64_t seed) {
    const UnifiedFrame frame = scene_unified_frame(scene);
    std::mt19937_64 rng(seed ^ fnv1a(scene.scene_id));

    std::map<std::string, size_t> category_count;
    for (const auto& obj : scene.objects) ++category_count[obj.category];

    // All same-category instances need a first_frame before the temporal
    // strategy may run; otherwise it is skipped rather than raised as a data
    // defect mid-emission.
    const auto temporal_available = [&](const std::string& category) {
        for (const auto& obj : scene.objects)
            if (obj.category == category && !obj.first_frame) return false;
        return true;
    };

    const auto shuffled = [&](std::vector<size_t> v) {
        for (size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[rng() % i]);
        return v;
    };

    std::vector<QARecord> records;
    for (size_t oi = 0; oi < scene.objects.size(); ++oi) {
        const ObjectRecord& obj = scene.objects[oi];

        Box7DoF box;
        try {
            box = box9_to_box7(frame, obj.box);
        } catch (const Error& e) {
            log_warn("grounding: skipping '" + obj.id + "': " + e.what());
            continue;
        }

        std::optional<Referral> referral;
        std::string phrase;
        if (category_count[obj.category] == 1) {
            phrase = "the " + obj.category;  // bare category is already unique
        } else {
            // Anchor candidates are other-category objects; referring to a
            // target through one of its own category mates reads circular.
            std::vector<size_t> others;
            for (size_t j = 0; j < scene.objects.size(); ++j)
                if (scene.objects[j].category != obj.category) others.push_back(j);

            for (ReferralKind kind : policy) {
                if (referral) break;
                switch (kind) {
                    case ReferralKind::proximity:
                        for (size_t aj : shuffled(others)) {
                            auto result = proximity_referral(scene, obj.id,
                                                             scene.objects[aj].id);
                            if (result.accepted()) {
                                referral = std::move(result.referral);
                                break;
                            }
                        }
                        break;
                    case ReferralKind::direction: {
                        // Ordered anchor pairs, sampled; capped to keep large
                        // scenes tractable.
                        std::vector<size_t> pairs(others.size() * (others.size() - 1));
                        size_t w = 0;
                        for (size_t p = 0; p < others.size(); ++p)
                            for (size_t q = 0; q < others.size(); ++q)
                                if (p != q) pairs[w++] = p * others.size() + q;
                        pairs = shuffled(std::move(pairs));
                        const size_t attempts = std::min<size_t>(pairs.size(), 128);
                        for (size_t pi = 0; pi < attempts; ++pi) {
                            const size_t p = pairs[pi] / others.size();
                            const size_t q = pairs[pi] % others.size();
                            auto result = direction_referral(scene, obj.id,
                                                             scene.objects[others[p]].id,
                                                             scene.objects[others[q]].id);
                            if (result.accepted()) {
                                referral = std::move(result.referral);
                                break;
                            }
                        }
                        break;
                    }
                    case ReferralKind::temporal:
                        if (temporal_available(obj.category)) {
                            auto result = temporal_referral(scene, obj.id);
                            if (result.accepted()) referral = std::move(result.referral);
                        } else {
                            log_info("grounding: temporal strategy unavailable for '" +
                                     obj.id + "' (missing first_frame)");
                        }
                        break;
                }
            }
            if (!referral) {
                log_info("grounding: skipping '" + obj.id + "': no unambiguous referral");
                continue;
            }
            phrase = referral->phrase;
        }

        const Box7DoF rounded = round_box7(box);
        QARecord rec;
        rec.scene_id = scene.scene_id;
        rec.task = QATask::grounding_qa;
        rec.template_id = kGroundingTemplateId;
        rec.system_context = kGroundingContext;
        rec.question = "What is the 7-DoF bounding box (x_c, y_c, z_c, l, w, h, yaw) of " +
                       phrase + "?";
        rec.answer = format_box7_answer(rounded);
        rec.ground_truth = rounded;
        rec.provenance_index = oi;
        rec.referral = std::move(referral);
        records.push_back(std::move(rec));
    }
    return records;
}

std::string serialize_jsonl(const std::vector<QARecord>& records) {
    std::vector<const QARecord*> order;
    order.reserve(records.size());
    for (const auto& rec : records) order.push_back(&rec);
    std::sort(order.begin(), order.end(), [](const QARecord* a, const QARecord* b) {
        const auto key = [](const QARecord* r) {
            return std::make_tuple(r->scene_id, std::string(to_string(r->task)),
                                   r->provenance_index);
        };
        return key(a) < key(b);
    });
    std::string out;
    for (const QARecord* rec : order) out += record_to_json(*rec).dump() + "\n";
    return out;
}

std::vector<QARecord> parse_jsonl(const std::string& text) {
    std::vector<QARecord> records;
    size_t start = 0;
    size_t lineno = 0;
    while (start < text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        const std::string line = text.substr(start, end - start);
        start = end + 1;
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error("qa jsonl line " + std::to_string(lineno) + ": " + e.what());
        }
        if (j.contains("_meta")) continue;
        try {
            records.push_back(record_from_json(j));
        } catch (const json::exception& e) {
            throw Error("qa jsonl line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return records;
}

}  // namespace scaffold
