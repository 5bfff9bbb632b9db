#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scaffold/scene.hpp"

namespace scaffold {

enum class ReferralKind { proximity, direction, temporal };

/// Why a referral attempt was declined. Rejections are expected outcomes, not
/// errors; data defects (missing first_frame) throw instead.
enum class RejectReason {
    none,
    singleton_category,   // referral unnecessary
    ambiguous_margin,     // distance gap below the 5% margin
    not_extreme,          // target is neither nearest nor furthest
    shared_sector,        // another same-category instance in the target's sector
    boundary_proximity,   // target within 5 degrees of a sector boundary
    coincident_anchors,   // degenerate reference geometry
    tied_first_frames,    // temporal order not strict
};

const char* to_string(RejectReason reason);
const char* to_string(ReferralKind kind);
ReferralKind referral_kind_from_string(const std::string& name);

/// A referring expression that uniquely identifies target_id in its scene.
/// qualifier: "nearest"/"furthest" for proximity, "front"/"right"/"behind"/
/// "left" for direction, the 1-based ordinal (decimal string) for temporal.
struct Referral {
    ReferralKind kind = ReferralKind::proximity;
    std::string target_id;
    std::vector<std::string> anchor_ids;  // 0-2 ids
    std::string phrase;
    std::string qualifier;
};

struct ReferralResult {
    std::optional<Referral> referral;
    RejectReason reject = RejectReason::none;

    bool accepted() const { return referral.has_value(); }
};

/// Target is the strict nearest or strict furthest same-category instance from
/// the anchor, with a relative distance margin >= 5% over the runner-up.
/// Distances are between 3D box centers.
ReferralResult proximity_referral(const Scene& scene, const std::string& target_id,
                                  const std::string& anchor_id);

/// The position anchor and orientation anchor define a BEV "front" direction;
/// the plane splits into four 90-degree sectors (front/left/behind/right,
/// counterclockwise positive). Succeeds when the target is the only
/// same-category instance in its sector and lies >= 5 degrees from both sector
/// boundaries.
ReferralResult direction_referral(const Scene& scene, const std::string& target_id,
                                  const std::string& position_anchor_id,
                                  const std::string& orientation_anchor_id);

/// Ranks the target by first appearance among its category. Succeeds when all
/// same-category first frames are present and pairwise distinct; throws Error
/// when any first_frame is missing (data defect).
ReferralResult temporal_referral(const Scene& scene, const std::string& target_id);

/// Re-resolves a referral against the scene; returns the matching object ids,
/// sorted. Accepted referrals resolve to exactly their target.
std::vector<std::string> resolve(const Scene& scene, const Referral& referral);

}  // namespace scaffold
