#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "scaffold/geometry.hpp"
#include "scaffold/referral.hpp"
#include "scaffold/scene_graph.hpp"

namespace scaffold {

enum class QATask { scenegraph_qa, grounding_qa };

const char* to_string(QATask task);

/// One self-contained question/answer sample. The answer string is exactly the
/// canonical serialization of ground_truth, so parsing it recovers the payload.
struct QARecord {
    std::string scene_id;
    QATask task = QATask::scenegraph_qa;
    std::string template_id;
    std::string system_context;
    std::string question;
    std::string answer;
    std::variant<GridCoord, Box7DoF> ground_truth;
    size_t provenance_index = 0;  // lcm index (scenegraph) or object index (grounding)
    std::optional<Referral> referral;

    /// Stable record id: "<scene_id>/<task>/<provenance_index>".
    std::string record_id() const;

    bool operator==(const QARecord& o) const;
};

/// Canonical grid answer, e.g. "[7, 3]".
std::string format_grid_answer(const GridCoord& cell);

/// Canonical 7-tuple answer with 2-decimal fixed point, e.g.
/// "(2.00, 0.00, 0.50, 1.00, 1.00, 1.00, 0.00)". Negative zeros normalize to 0.
std::string format_box7_answer(const Box7DoF& box);

/// Rounds every component to 2 decimals (the declared answer precision).
Box7DoF round_box7(const Box7DoF& box);

/// One record per LocalCogMap: the question names the anchors at their fixed
/// cells and asks for the target's cell; the answer is "[u, v]". Requires a
/// rigid graph whose ids all exist in the scene.
std::vector<QARecord> emit_scenegraph_qa(const SceneGraph& graph, const Scene& scene);

/// One record per groundable object. Singleton categories use the bare
/// category; otherwise referral strategies are attempted in policy order and
/// the first accepted one is used. Objects with no valid referral (or with a
/// gimbal-degenerate box) are skipped with a logged reason. The seed fixes the
/// anchor sampling order. Requires a trajectory.
std::vector<QARecord> emit_grounding_qa(const Scene& scene,
                                        const std::vector<ReferralKind>& policy,
                                        uint64_t seed);

inline std::vector<ReferralKind> default_policy() {
    return {ReferralKind::proximity, ReferralKind::direction, ReferralKind::temporal};
}

/// One JSON object per line, sorted by (scene_id, task, provenance index),
/// trailing newline. Byte-stable across runs.
std::string serialize_jsonl(const std::vector<QARecord>& records);

/// Inverse of serialize_jsonl. Lines carrying a "_meta" key are skipped.
std::vector<QARecord> parse_jsonl(const std::string& text);

}  // namespace scaffold
