#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "scaffold/geometry.hpp"
#include "scaffold/metrics.hpp"
#include "scaffold/qa.hpp"
#include "scaffold/referral.hpp"
#include "scaffold/scene.hpp"
#include "scaffold/scene_graph.hpp"
#include "scaffold/version.hpp"

namespace py = pybind11;
using namespace scaffold;

namespace {

Vec2 to_vec2(const std::pair<double, double>& p) { return {p.first, p.second}; }
py::tuple from_vec2(const Vec2& p) { return py::make_tuple(p.x, p.y); }
py::tuple from_vec3(const Vec3& p) { return py::make_tuple(p.x, p.y, p.z); }
py::tuple from_grid(const GridCoord& g) { return py::make_tuple(g.u, g.v); }

std::vector<ReferralKind> to_policy(const std::vector<std::string>& names) {
    std::vector<ReferralKind> policy;
    for (const auto& name : names) policy.push_back(referral_kind_from_string(name));
    return policy;
}

std::map<std::string, Vec2> to_layout(const std::map<std::string, std::pair<double, double>>& in) {
    std::map<std::string, Vec2> out;
    for (const auto& [id, p] : in) out[id] = to_vec2(p);
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Scene-graph and 7-DoF grounding toolkit: cognitive-map triplet encoding, "
              "incremental scene graphs, QA emission, and evaluation metrics.";
    m.attr("__version__") = kVersion;

    py::register_exception<Error>(m, "Error");

    py::class_<ObjectRecord>(m, "ObjectRecord")
        .def_readonly("id", &ObjectRecord::id)
        .def_readonly("category", &ObjectRecord::category)
        .def_property_readonly("center",
                               [](const ObjectRecord& o) { return from_vec3(o.box.center); })
        .def_property_readonly("size",
                               [](const ObjectRecord& o) {
                                   return py::make_tuple(o.box.size.l, o.box.size.w, o.box.size.h);
                               })
        .def_property_readonly("first_frame",
                               [](const ObjectRecord& o) -> py::object {
                                   if (o.first_frame) return py::int_(*o.first_frame);
                                   return py::none();
                               })
        .def("__repr__", [](const ObjectRecord& o) {
            return "<ObjectRecord id='" + o.id + "' category='" + o.category + "'>";
        });

    py::class_<Scene>(m, "Scene")
        .def_readonly("scene_id", &Scene::scene_id)
        .def_readonly("objects", &Scene::objects)
        .def_property_readonly("has_trajectory",
                               [](const Scene& s) { return !s.trajectory.empty(); })
        .def("__repr__", [](const Scene& s) {
            return "<Scene '" + s.scene_id + "' with " + std::to_string(s.objects.size()) +
                   " objects>";
        });

    py::class_<LocalCogMap>(m, "LocalCogMap")
        .def_readonly("anchor_a", &LocalCogMap::anchor_a_id)
        .def_readonly("anchor_b", &LocalCogMap::anchor_b_id)
        .def_readonly("target", &LocalCogMap::target_id)
        .def_property_readonly("target_grid",
                               [](const LocalCogMap& l) { return from_grid(l.target_grid); })
        .def_property_readonly("target_grid_continuous",
                               [](const LocalCogMap& l) {
                                   return from_vec2(l.target_grid_continuous);
                               })
        .def_readonly("out_of_grid", &LocalCogMap::out_of_grid)
        .def("__repr__", [](const LocalCogMap& l) {
            return "<LocalCogMap (" + l.anchor_a_id + ", " + l.anchor_b_id + " -> " +
                   l.target_id + ") grid=(" + std::to_string(l.target_grid.u) + ", " +
                   std::to_string(l.target_grid.v) + ")>";
        });

    py::class_<SceneGraph>(m, "SceneGraph")
        .def_readonly("scene_id", &SceneGraph::scene_id)
        .def_readonly("delta", &SceneGraph::delta)
        .def_readonly("placement_order", &SceneGraph::placement_order)
        .def_readonly("lcms", &SceneGraph::lcms)
        .def("__repr__", [](const SceneGraph& g) {
            return "<SceneGraph '" + g.scene_id + "' with " + std::to_string(g.lcms.size()) +
                   " maps>";
        });

    py::class_<ValidationReport>(m, "ValidationReport")
        .def_readonly("connected", &ValidationReport::connected)
        .def_readonly("rigid", &ValidationReport::rigid)
        .def_readonly("components", &ValidationReport::components)
        .def_property_readonly("stalled_at",
                               [](const ValidationReport& r) -> py::object {
                                   if (r.stalled_at) return py::int_(*r.stalled_at);
                                   return py::none();
                               });

    py::class_<Box7DoF>(m, "Box7DoF")
        .def_property_readonly("center", [](const Box7DoF& b) { return from_vec3(b.center); })
        .def_property_readonly("size",
                               [](const Box7DoF& b) {
                                   return py::make_tuple(b.size.l, b.size.w, b.size.h);
                               })
        .def_readonly("yaw", &Box7DoF::yaw)
        .def("as_tuple", [](const Box7DoF& b) {
            return py::make_tuple(b.center.x, b.center.y, b.center.z, b.size.l, b.size.w,
                                  b.size.h, b.yaw);
        });

    py::class_<Referral>(m, "Referral")
        .def_property_readonly("kind", [](const Referral& r) { return to_string(r.kind); })
        .def_readonly("target", &Referral::target_id)
        .def_readonly("anchors", &Referral::anchor_ids)
        .def_readonly("qualifier", &Referral::qualifier)
        .def_readonly("phrase", &Referral::phrase);

    py::class_<ReferralResult>(m, "ReferralResult")
        .def_property_readonly("accepted", &ReferralResult::accepted)
        .def_property_readonly("reject_reason",
                               [](const ReferralResult& r) { return to_string(r.reject); })
        .def_property_readonly("referral", [](const ReferralResult& r) -> py::object {
            if (r.referral) return py::cast(*r.referral);
            return py::none();
        });

    py::class_<QARecord>(m, "QARecord")
        .def_readonly("scene_id", &QARecord::scene_id)
        .def_property_readonly("task", [](const QARecord& r) { return to_string(r.task); })
        .def_readonly("template_id", &QARecord::template_id)
        .def_readonly("system_context", &QARecord::system_context)
        .def_readonly("question", &QARecord::question)
        .def_readonly("answer", &QARecord::answer)
        .def_property_readonly("id", &QARecord::record_id);

    py::class_<EvalSummary>(m, "EvalSummary")
        .def_readonly("count", &EvalSummary::count)
        .def_readonly("mean", &EvalSummary::mean)
        .def_readonly("median", &EvalSummary::median)
        .def_readonly("bin_width", &EvalSummary::bin_width)
        .def_readonly("histogram", &EvalSummary::histogram);

    m.def("parse_scene", &parse_scene, py::arg("text"),
          "Parse and validate a scene JSON document.");
    m.def("serialize_scene", &serialize_scene, py::arg("scene"));

    m.def("wrap_yaw", &wrap_yaw, py::arg("theta"), "Reduce an angle to (-pi, pi].");
    m.def(
        "quantize",
        [](const std::pair<double, double>& cont) {
            const auto [grid, outside] = quantize(to_vec2(cont));
            return py::make_tuple(from_grid(grid), outside);
        },
        py::arg("continuous"));
    m.def(
        "encode_triplet",
        [](const std::pair<double, double>& pa, const std::pair<double, double>& pb,
           const std::pair<double, double>& pt, const std::string& id_a,
           const std::string& id_b, const std::string& id_t) {
            return encode_triplet(to_vec2(pa), to_vec2(pb), to_vec2(pt), id_a, id_b, id_t);
        },
        py::arg("pa"), py::arg("pb"), py::arg("pt"), py::arg("id_a") = "a",
        py::arg("id_b") = "b", py::arg("id_t") = "t");
    m.def(
        "decode_target",
        [](const LocalCogMap& lcm, const std::pair<double, double>& pa,
           const std::pair<double, double>& pb, bool use_continuous) {
            return from_vec2(decode_target(lcm, to_vec2(pa), to_vec2(pb), use_continuous));
        },
        py::arg("lcm"), py::arg("pa"), py::arg("pb"), py::arg("use_continuous") = false);

    m.def("build_incremental", &build_incremental, py::arg("scene"), py::arg("delta") = 3.0);
    m.def("exhaustive_triplets", &exhaustive_triplets, py::arg("scene"), py::arg("delta"));
    m.def("sample_random_triplets", &sample_random_triplets, py::arg("scene"), py::arg("k"),
          py::arg("seed") = 0);
    m.def(
        "validate_lcms",
        [](const std::vector<LocalCogMap>& lcms, const std::vector<std::string>& ids) {
            return validate(lcms, std::set<std::string>(ids.begin(), ids.end()));
        },
        py::arg("lcms"), py::arg("object_ids"));
    m.def("validate_graph",
          [](const SceneGraph& graph) { return validate(graph); }, py::arg("graph"));
    m.def(
        "reconstruct",
        [](const SceneGraph& graph, bool use_continuous) {
            std::map<std::string, py::tuple> out;
            for (const auto& [id, p] : reconstruct(graph, use_continuous))
                out[id] = from_vec2(p);
            return out;
        },
        py::arg("graph"), py::arg("use_continuous") = true);
    m.def(
        "procrustes_align",
        [](const std::map<std::string, std::pair<double, double>>& a,
           const std::map<std::string, std::pair<double, double>>& b) {
            const ProcrustesResult res = procrustes_align(to_layout(a), to_layout(b));
            py::dict transform;
            transform["scale"] = res.transform.scale;
            transform["rotation"] = res.transform.rotation;
            transform["translation"] = from_vec2(res.transform.translation);
            return py::make_tuple(transform, res.rms_residual);
        },
        py::arg("layout_a"), py::arg("layout_b"));
    m.def("serialize_graph", &serialize_graph, py::arg("graph"));
    m.def("parse_graph", &parse_graph, py::arg("text"));

    m.def(
        "normalize_scene",
        [](const Scene& scene) {
            const UnifiedFrame frame = scene_unified_frame(scene);
            std::map<std::string, Box7DoF> out;
            for (const auto& obj : scene.objects)
                out[obj.id] = box9_to_box7(frame, obj.box);
            return out;
        },
        py::arg("scene"), "7-DoF boxes of all objects in the unified frame, keyed by id.");

    m.def("proximity_referral", &proximity_referral, py::arg("scene"), py::arg("target_id"),
          py::arg("anchor_id"));
    m.def("direction_referral", &direction_referral, py::arg("scene"), py::arg("target_id"),
          py::arg("position_anchor_id"), py::arg("orientation_anchor_id"));
    m.def("temporal_referral", &temporal_referral, py::arg("scene"), py::arg("target_id"));
    m.def("resolve_referral", &resolve, py::arg("scene"), py::arg("referral"));

    m.def("emit_scenegraph_qa", &emit_scenegraph_qa, py::arg("graph"), py::arg("scene"));
    m.def(
        "emit_grounding_qa",
        [](const Scene& scene, const std::vector<std::string>& policy, uint64_t seed) {
            return emit_grounding_qa(scene, to_policy(policy), seed);
        },
        py::arg("scene"),
        py::arg("policy") = std::vector<std::string>{"proximity", "direction", "temporal"},
        py::arg("seed") = 0);
    m.def("serialize_jsonl", &serialize_jsonl, py::arg("records"));

    m.def("parse_grid_answer",
          [](const std::string& text) { return from_grid(parse_grid_answer(text)); },
          py::arg("text"));
    m.def("parse_box7_answer", &parse_box7_answer, py::arg("text"));
    m.def("format_grid_answer",
          [](const std::pair<int, int>& cell) {
              return format_grid_answer(GridCoord{cell.first, cell.second});
          },
          py::arg("cell"));
    m.def("format_box7_answer", &format_box7_answer, py::arg("box"));
    m.def(
        "cogmap_error",
        [](const std::vector<std::pair<int, int>>& preds,
           const std::vector<std::pair<int, int>>& gts, double bin_width) {
            std::vector<GridCoord> p, g;
            for (const auto& [u, v] : preds) p.push_back({u, v});
            for (const auto& [u, v] : gts) g.push_back({u, v});
            return cogmap_error(p, g, bin_width);
        },
        py::arg("preds"), py::arg("gts"), py::arg("bin_width") = 0.5);
    m.def(
        "grounding_errors",
        [](const std::vector<Box7DoF>& preds, const std::vector<Box7DoF>& gts,
           double center_bin, double size_bin, double yaw_bin) {
            const GroundingErrorSummary s = grounding_errors(preds, gts, center_bin, size_bin,
                                                             yaw_bin);
            return py::make_tuple(s.center, s.size, s.yaw);
        },
        py::arg("preds"), py::arg("gts"), py::arg("center_bin") = 0.1,
        py::arg("size_bin") = 0.1, py::arg("yaw_bin") = 0.1);
    m.def("write_histogram_csv", &write_histogram_csv, py::arg("summary"));
}
