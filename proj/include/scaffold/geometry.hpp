#pragma once

#include "scaffold/scene.hpp"

namespace scaffold {

/// Global grounding coordinate system: origin at the first camera's optical
/// center, +x along the ground-plane projection of its optical axis, z-up,
/// right-handed. Axes are expressed in source-frame coordinates.
struct UnifiedFrame {
    Vec3 origin;
    Vec3 x_axis;
    Vec3 y_axis;  // up x x_axis
    Vec3 up{0.0, 0.0, 1.0};
};

/// 7-DoF box in the unified frame: center, extents along local axes, and yaw
/// about the vertical z-axis (radians, right-hand rule). Roll/pitch omitted.
struct Box7DoF {
    Vec3 center;
    Size3 size;
    double yaw = 0.0;
};

/// Reduces an angle to (-pi, pi]. Throws Error on non-finite input.
double wrap_yaw(double theta);

/// Optical axis of a camera pose in source-frame coordinates: rotation * (0,0,1).
Vec3 optical_axis(const CameraFrame& camera);

/// Builds the unified frame from the trajectory's first camera. Throws Error
/// when the optical axis is within kDegenerateEps of vertical.
UnifiedFrame build_unified_frame(const CameraFrame& first);

/// Unified frame for a scene (first trajectory frame). Throws Error when the
/// scene has no trajectory.
UnifiedFrame scene_unified_frame(const Scene& scene);

/// Expresses a source-frame point in the unified frame.
Vec3 transform_point(const UnifiedFrame& frame, const Vec3& p);

/// Converts a 9-DoF box to the 7-DoF representation: center transformed, sizes
/// copied unchanged, yaw = z angle of the z-y-x Euler decomposition of the box
/// rotation expressed in the unified frame. Throws Error when the box's local
/// x-axis is within kDegenerateEps of vertical (yaw ill-defined).
Box7DoF box9_to_box7(const UnifiedFrame& frame, const Box9DoF& box);

}  // namespace scaffold
