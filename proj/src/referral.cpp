#include "scaffold/referral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace scaffold {

namespace {

constexpr double kDistanceMargin = 0.05;          // 5% relative gap
constexpr double kBoundaryMargin = M_PI / 36.0;   // 5 degrees

ReferralResult reject(RejectReason reason) { return ReferralResult{std::nullopt, reason}; }

ReferralResult accept(Referral referral) {
    return ReferralResult{std::move(referral), RejectReason::none};
}

std::vector<const ObjectRecord*> category_instances(const Scene& scene,
                                                    const std::string& category) {
    std::vector<const ObjectRecord*> out;
    for (const auto& obj : scene.objects)
        if (obj.category == category) out.push_back(&obj);
    return out;
}

std::string ordinal_word(int k) {
    static const char* words[] = {"first", "second", "third",  "fourth", "fifth",
                                  "sixth", "seventh", "eighth", "ninth",  "tenth"};
    if (k >= 1 && k <= 10) return words[k - 1];
    const int mod100 = k % 100;
    const int mod10 = k % 10;
    const char* suffix = "th";
    if (mod100 < 11 || mod100 > 13) {
        if (mod10 == 1) suffix = "st";
        else if (mod10 == 2) suffix = "nd";
        else if (mod10 == 3) suffix = "rd";
    }
    return std::to_string(k) + suffix;
}

// Signed BEV angle from `from` to `to`, counterclockwise positive, (-pi, pi].
double signed_angle(const Vec2& from, const Vec2& to) {
    return std::atan2(from.cross(to), from.dot(to));
}

enum class Sector { front, left, behind, right };

Sector sector_of(double angle) {
    if (std::abs(angle) <= M_PI / 4.0) return Sector::front;
    if (angle > M_PI / 4.0 && angle < 3.0 * M_PI / 4.0) return Sector::left;
    if (angle < -M_PI / 4.0 && angle > -3.0 * M_PI / 4.0) return Sector::right;
    return Sector::behind;
}

const char* sector_name(Sector s) {
    switch (s) {
        case Sector::front: return "front";
        case Sector::left: return "left";
        case Sector::behind: return "behind";
        case Sector::right: return "right";
    }
    return "front";
}

const char* sector_relation(Sector s) {
    switch (s) {
        case Sector::front: return "in front of";
        case Sector::left: return "to the left of";
        case Sector::behind: return "behind";
        case Sector::right: return "to the right of";
    }
    return "in front of";
}

double boundary_distance(double angle) {
    double best = std::numeric_limits<double>::infinity();
    for (double b : {-3.0 * M_PI / 4.0, -M_PI / 4.0, M_PI / 4.0, 3.0 * M_PI / 4.0}) {
        const double diff = std::abs(angle - b);
        best = std::min(best, std::min(diff, 2.0 * M_PI - diff));
    }
    return best;
}

}  // namespace

const char* to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::none: return "none";
        case RejectReason::singleton_category: return "singleton_category";
        case RejectReason::ambiguous_margin: return "ambiguous_margin";
        case RejectReason::not_extreme: return "not_extreme";
        case RejectReason::shared_sector: return "shared_sector";
        case RejectReason::boundary_proximity: return "boundary_proximity";
        case RejectReason::coincident_anchors: return "coincident_anchors";
        case RejectReason::tied_first_frames: return "tied_first_frames";
    }
    return "none";
}

const char* to_string(ReferralKind kind) {
    switch (kind) {
        case ReferralKind::proximity: return "proximity";
        case ReferralKind::direction: return "direction";
        case ReferralKind::temporal: return "temporal";
    }
    return "proximity";
}

ReferralKind referral_kind_from_string(const std::string& name) {
    if (name == "proximity") return ReferralKind::proximity;
    if (name == "direction") return ReferralKind::direction;
    if (name == "temporal") return ReferralKind::temporal;
    throw Error("unknown referral strategy '" + name + "'");
}

ReferralResult proximity_referral(const Scene& scene, const std::string& target_id,
                                  const std::string& anchor_id) {
    if (target_id == anchor_id) throw Error("proximity referral: anchor equals target");
    const ObjectRecord& target = scene.at(target_id);
    const ObjectRecord& anchor = scene.at(anchor_id);

    double target_dist = 0.0;
    double others_min = std::numeric_limits<double>::infinity();
    double others_max = -std::numeric_limits<double>::infinity();
    size_t others = 0;
    for (const ObjectRecord* inst : category_instances(scene, target.category)) {
        if (inst->id == anchor_id) continue;
        const double d = center_distance(*inst, anchor);
        if (inst->id == target_id) {
            target_dist = d;
        } else {
            others_min = std::min(others_min, d);
            others_max = std::max(others_max, d);
            ++others;
        }
    }
    if (others == 0) return reject(RejectReason::singleton_category);

    std::string qualifier;
    double margin = 0.0;
    if (target_dist < others_min) {
        qualifier = "nearest";
        margin = (others_min - target_dist) / others_min;
    } else if (target_dist > others_max) {
        qualifier = "furthest";
        margin = (target_dist - others_max) / target_dist;
    } else {
        return reject(RejectReason::not_extreme);
    }
    if (margin < kDistanceMargin) return reject(RejectReason::ambiguous_margin);

    Referral ref;
    ref.kind = ReferralKind::proximity;
    ref.target_id = target_id;
    ref.anchor_ids = {anchor_id};
    ref.qualifier = qualifier;
    ref.phrase = "the " + target.category + " " + qualifier +
                 (qualifier == "nearest" ? " to the " : " from the ") + anchor.category +
                 " '" + anchor.id + "'";
    return accept(std::move(ref));
}

ReferralResult direction_referral(const Scene& scene, const std::string& target_id,
                                  const std::string& position_anchor_id,
                                  const std::string& orientation_anchor_id) {
    if (target_id == position_anchor_id || target_id == orientation_anchor_id ||
        position_anchor_id == orientation_anchor_id)
        throw Error("direction referral: ids must be pairwise distinct");
    const ObjectRecord& target = scene.at(target_id);
    const ObjectRecord& pos_anchor = scene.at(position_anchor_id);
    const ObjectRecord& ori_anchor = scene.at(orientation_anchor_id);

    const Vec2 origin = pos_anchor.box.center.xy();
    const Vec2 front = ori_anchor.box.center.xy() - origin;
    if (front.norm() < kDegenerateEps) return reject(RejectReason::coincident_anchors);
    const Vec2 rel = target.box.center.xy() - origin;
    if (rel.norm() < kDegenerateEps) return reject(RejectReason::coincident_anchors);

    const double angle = signed_angle(front, rel);
    if (boundary_distance(angle) < kBoundaryMargin)
        return reject(RejectReason::boundary_proximity);
    const Sector sector = sector_of(angle);

    for (const ObjectRecord* inst : category_instances(scene, target.category)) {
        if (inst->id == target_id || inst->id == position_anchor_id ||
            inst->id == orientation_anchor_id)
            continue;
        const Vec2 other = inst->box.center.xy() - origin;
        // An instance on top of the anchor belongs to no sector and cannot be
        // told apart from the target.
        if (other.norm() < kDegenerateEps) return reject(RejectReason::shared_sector);
        if (sector_of(signed_angle(front, other)) == sector)
            return reject(RejectReason::shared_sector);
    }

    Referral ref;
    ref.kind = ReferralKind::direction;
    ref.target_id = target_id;
    ref.anchor_ids = {position_anchor_id, orientation_anchor_id};
    ref.qualifier = sector_name(sector);
    ref.phrase = "the " + target.category + " " + sector_relation(sector) + " the " +
                 pos_anchor.category + " '" + pos_anchor.id + "' (facing from it toward the " +
                 ori_anchor.category + " '" + ori_anchor.id + "')";
    return accept(std::move(ref));
}

ReferralResult temporal_referral(const Scene& scene, const std::string& target_id) {
    const ObjectRecord& target = scene.at(target_id);
    std::vector<int> frames;
    for (const ObjectRecord* inst : category_instances(scene, target.category)) {
        if (!inst->first_frame)
            throw Error("temporal referral: object '" + inst->id + "' has no first_frame");
        frames.push_back(*inst->first_frame);
    }
    std::vector<int> sorted = frames;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        return reject(RejectReason::tied_first_frames);

    const int target_frame = *target.first_frame;
    const int rank = 1 + static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(),
                                                           target_frame) -
                                          sorted.begin());
    Referral ref;
    ref.kind = ReferralKind::temporal;
    ref.target_id = target_id;
    ref.qualifier = std::to_string(rank);
    ref.phrase = "the " + ordinal_word(rank) + " " + target.category + " to appear";
    return accept(std::move(ref));
}

std::vector<std::string> resolve(const Scene& scene, const Referral& referral) {
    const ObjectRecord& target = scene.at(referral.target_id);
    const auto instances = category_instances(scene, target.category);
    std::vector<std::string> out;

    switch (referral.kind) {
        case ReferralKind::proximity: {
            if (referral.anchor_ids.size() != 1)
                throw Error("resolve: proximity referral needs one anchor");
            const ObjectRecord& anchor = scene.at(referral.anchor_ids[0]);
            const bool nearest = referral.qualifier == "nearest";
            double best = nearest ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
            for (const ObjectRecord* inst : instances) {
                if (inst->id == anchor.id) continue;
                const double d = center_distance(*inst, anchor);
                if (nearest ? d < best : d > best) {
                    best = d;
                    out = {inst->id};
                } else if (d == best) {
                    out.push_back(inst->id);
                }
            }
            break;
        }
        case ReferralKind::direction: {
            if (referral.anchor_ids.size() != 2)
                throw Error("resolve: direction referral needs two anchors");
            const Vec2 origin = scene.at(referral.anchor_ids[0]).box.center.xy();
            const Vec2 front = scene.at(referral.anchor_ids[1]).box.center.xy() - origin;
            if (front.norm() < kDegenerateEps)
                throw Error("resolve: coincident direction anchors");
            for (const ObjectRecord* inst : instances) {
                if (inst->id == referral.anchor_ids[0] || inst->id == referral.anchor_ids[1])
                    continue;
                const Vec2 rel = inst->box.center.xy() - origin;
                if (rel.norm() < kDegenerateEps) continue;
                if (sector_name(sector_of(signed_angle(front, rel))) == referral.qualifier)
                    out.push_back(inst->id);
            }
            break;
        }
        case ReferralKind::temporal: {
            std::vector<std::pair<int, std::string>> ordered;
            for (const ObjectRecord* inst : instances) {
                if (!inst->first_frame)
                    throw Error("resolve: object '" + inst->id + "' has no first_frame");
                ordered.emplace_back(*inst->first_frame, inst->id);
            }
            std::sort(ordered.begin(), ordered.end());
            const size_t k = static_cast<size_t>(std::stoi(referral.qualifier));
            if (k >= 1 && k <= ordered.size()) {
                const int frame = ordered[k - 1].first;
                for (const auto& [f, id] : ordered)
                    if (f == frame) out.push_back(id);
            }
            break;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace scaffold
