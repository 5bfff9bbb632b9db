#include <algorithm>

#include "doctest.h"
#include "scaffold/metrics.hpp"
#include "scaffold/qa.hpp"
#include "test_support.hpp"

using namespace scaffold;

namespace {

Scene grounded_scene() {
    Scene scene;
    scene.scene_id = "grounded";
    scene.objects = {
        testsup::make_object("sofa_0", "sofa", {2.0, 0.0, 0.5}),
        testsup::make_object("chair_0", "chair", {1.0, 1.0, 0.4}),
        testsup::make_object("chair_1", "chair", {4.0, -2.0, 0.4}),
        testsup::make_object("lamp_0", "lamp", {0.5, -1.0, 1.2}),
    };
    scene.objects[1].first_frame = 3;
    scene.objects[2].first_frame = 12;
    scene.trajectory.push_back(testsup::camera_at({0, 0, 0}, {1, 0, 0}));
    return scene;
}

Scene triplet_scene() {
    Scene scene;
    scene.scene_id = "triplet";
    scene.objects = {
        testsup::make_object("a", "table", {0.0, 0.0, 0.0}),
        testsup::make_object("b", "shelf", {0.0, -2.0, 0.0}),
        testsup::make_object("t", "chair", {2.0, -2.0, 0.0}),
    };
    return scene;
}

}  // namespace

TEST_CASE("scenegraph records carry the worked-example answer") {
    const Scene scene = triplet_scene();
    const SceneGraph graph = build_incremental(scene, 10.0);
    const auto records = emit_scenegraph_qa(graph, scene);
    REQUIRE(records.size() == 1);
    const QARecord& rec = records[0];
    CHECK(rec.task == QATask::scenegraph_qa);
    CHECK(rec.answer == "[7, 3]");
    CHECK(std::get<GridCoord>(rec.ground_truth) == GridCoord{7, 3});
    CHECK(rec.question.find("table 'a'") != std::string::npos);
    CHECK(rec.question.find("[5, 5]") != std::string::npos);
    CHECK(rec.question.find("shelf 'b'") != std::string::npos);
    CHECK(rec.question.find("[5, 3]") != std::string::npos);
    CHECK(rec.question.find("chair 't'") != std::string::npos);
    CHECK(rec.system_context.find("10x10") != std::string::npos);
    CHECK(rec.record_id() == "triplet/scenegraph_qa/0");
}

TEST_CASE("scenegraph emission is a bijection with the maps and deterministic") {
    const Scene scene = testsup::random_scene(42, 9);
    const SceneGraph graph = build_incremental(scene, 3.0);
    const auto records = emit_scenegraph_qa(graph, scene);
    CHECK(records.size() == graph.lcms.size());
    CHECK(records.size() == scene.objects.size() - 2);
    CHECK(serialize_jsonl(records) == serialize_jsonl(emit_scenegraph_qa(graph, scene)));
}

TEST_CASE("scenegraph emission rejects non-rigid graphs") {
    SceneGraph graph;
    graph.scene_id = "triplet";
    graph.delta = 1.0;
    graph.placement_order = {"a", "b", "t", "x", "y"};
    LocalCogMap l1, l2;
    l1.anchor_a_id = "a";
    l1.anchor_b_id = "b";
    l1.target_id = "t";
    l2.anchor_a_id = "x";
    l2.anchor_b_id = "y";
    l2.target_id = "t";
    graph.lcms = {l1, l2};
    CHECK_THROWS_WITH_AS(emit_scenegraph_qa(graph, triplet_scene()),
                         doctest::Contains("not rigid"), Error);

    SceneGraph wrong_scene = build_incremental(triplet_scene(), 10.0);
    wrong_scene.scene_id = "other";
    CHECK_THROWS_WITH_AS(emit_scenegraph_qa(wrong_scene, triplet_scene()),
                         doctest::Contains("does not belong"), Error);
}

TEST_CASE("grounding answers use the canonical fixed-point format") {
    const Scene scene = grounded_scene();
    const auto records = emit_grounding_qa(scene, default_policy(), 0);

    const auto sofa = std::find_if(records.begin(), records.end(), [](const QARecord& r) {
        return r.provenance_index == 0;
    });
    REQUIRE(sofa != records.end());
    CHECK(sofa->answer == "(2.00, 0.00, 0.50, 1.00, 1.00, 1.00, 0.00)");
    CHECK_FALSE(sofa->referral.has_value());  // singleton category: bare phrase
    CHECK(sofa->question.find("the sofa") != std::string::npos);

    // Every answer reparses to its ground truth exactly.
    for (const auto& rec : records) {
        const Box7DoF parsed = parse_box7_answer(rec.answer);
        const Box7DoF& gt = std::get<Box7DoF>(rec.ground_truth);
        CHECK(parsed.center.x == gt.center.x);
        CHECK(parsed.center.y == gt.center.y);
        CHECK(parsed.center.z == gt.center.z);
        CHECK(parsed.size.l == gt.size.l);
        CHECK(parsed.size.w == gt.size.w);
        CHECK(parsed.size.h == gt.size.h);
        CHECK(parsed.yaw == gt.yaw);
    }
}

TEST_CASE("grounding referrals disambiguate duplicate categories") {
    const Scene scene = grounded_scene();
    const auto records = emit_grounding_qa(scene, default_policy(), 0);
    for (const auto& rec : records) {
        if (rec.provenance_index == 1 || rec.provenance_index == 2) {
            REQUIRE(rec.referral.has_value());
            CHECK(rec.question.find(rec.referral->phrase) != std::string::npos);
        }
    }
}

TEST_CASE("grounding without a trajectory is an error") {
    Scene scene = grounded_scene();
    scene.trajectory.clear();
    CHECK_THROWS_WITH_AS(emit_grounding_qa(scene, default_policy(), 0),
                         doctest::Contains("no trajectory"), Error);
}

TEST_CASE("objects whose every strategy fails are skipped") {
    Scene scene;
    scene.scene_id = "twins";
    // Two identical-category mugs placed symmetrically around the only anchor:
    // proximity ties, direction shares sectors, temporal ties.
    scene.objects = {
        testsup::make_object("anchor", "table", {0, 0, 0}),
        testsup::make_object("mug_0", "mug", {1.0, 0.0, 0.0}),
        testsup::make_object("mug_1", "mug", {-1.0, 0.0, 0.0}),
    };
    scene.objects[1].first_frame = 5;
    scene.objects[2].first_frame = 5;
    scene.trajectory.push_back(testsup::camera_at({0, 0, 1}, {1, 0, 0}));

    const auto records = emit_grounding_qa(scene, default_policy(), 0);
    REQUIRE(records.size() == 1);  // only the singleton table survives
    CHECK(records[0].provenance_index == 0);
}

TEST_CASE("format_box7_answer normalizes negative zero") {
    Box7DoF box;
    box.center = {-0.0012, 0.0, -0.004};
    box.size = {1.0, 2.0, 3.0};
    box.yaw = -0.001;
    CHECK(format_box7_answer(box) == "(0.00, 0.00, 0.00, 1.00, 2.00, 3.00, 0.00)");
}

TEST_CASE("jsonl serialization is sorted, stable, and invertible") {
    CHECK(serialize_jsonl({}).empty());

    const Scene scene = grounded_scene();
    const SceneGraph graph = build_incremental(scene, 5.0);
    auto records = emit_scenegraph_qa(graph, scene);
    const auto grounding = emit_grounding_qa(scene, default_policy(), 1);
    records.insert(records.end(), grounding.begin(), grounding.end());

    const std::string forward = serialize_jsonl(records);
    std::reverse(records.begin(), records.end());
    CHECK(serialize_jsonl(records) == forward);  // order-insensitive

    const size_t lines = static_cast<size_t>(
        std::count(forward.begin(), forward.end(), '\n'));
    CHECK(lines == records.size());
    CHECK(!forward.empty());
    CHECK(forward.back() == '\n');

    const auto back = parse_jsonl(forward);
    REQUIRE(back.size() == records.size());
    CHECK(serialize_jsonl(back) == forward);

    // Records are self-contained: each line parses alone and never points at
    // another record.
    size_t start = 0;
    while (start < forward.size()) {
        const size_t end = forward.find('\n', start);
        const std::string line = forward.substr(start, end - start);
        start = end + 1;
        const auto one = parse_jsonl(line + "\n");
        CHECK(one.size() == 1);
    }
}

TEST_CASE("parse_jsonl reports malformed lines and skips meta lines") {
    CHECK_THROWS_WITH_AS(parse_jsonl("not json\n"), doctest::Contains("line 1"), Error);
    CHECK_THROWS_WITH_AS(parse_jsonl("{\"task\": \"scenegraph_qa\"}\n"),
                         doctest::Contains("line 1"), Error);
    CHECK(parse_jsonl("{\"_meta\": {\"tool\": \"scaffold\"}}\n").empty());
    CHECK(parse_jsonl("").empty());
}

TEST_CASE("grid answers round trip through the metrics parser") {
    const Scene scene = triplet_scene();
    const SceneGraph graph = build_incremental(scene, 10.0);
    for (const auto& rec : emit_scenegraph_qa(graph, scene)) {
        const GridCoord parsed = parse_grid_answer(rec.answer);
        CHECK(parsed == std::get<GridCoord>(rec.ground_truth));
    }
}
