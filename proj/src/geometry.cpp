#include "scaffold/geometry.hpp"

#include <cmath>

namespace scaffold {

double wrap_yaw(double theta) {
    if (!std::isfinite(theta)) throw Error("wrap_yaw: non-finite angle");
    const double two_pi = 2.0 * M_PI;
    double r = std::fmod(theta, two_pi);  // (-2pi, 2pi)
    if (r <= -M_PI)
        r += two_pi;
    else if (r > M_PI)
        r -= two_pi;
    return r;
}

Vec3 optical_axis(const CameraFrame& camera) { return camera.rotation.col(2); }

UnifiedFrame build_unified_frame(const CameraFrame& first) {
    const Vec3 axis = optical_axis(first);
    const double ground_norm = std::hypot(axis.x, axis.y);
    if (ground_norm < kDegenerateEps)
        throw Error("unified frame: optical axis is vertical; ground-plane projection degenerate");
    UnifiedFrame frame;
    frame.origin = first.translation;
    frame.x_axis = {axis.x / ground_norm, axis.y / ground_norm, 0.0};
    frame.up = {0.0, 0.0, 1.0};
    frame.y_axis = frame.up.cross(frame.x_axis);
    return frame;
}

UnifiedFrame scene_unified_frame(const Scene& scene) {
    if (scene.trajectory.empty())
        throw Error("scene '" + scene.scene_id + "': no trajectory; unified frame unavailable");
    return build_unified_frame(scene.trajectory.front());
}

Vec3 transform_point(const UnifiedFrame& frame, const Vec3& p) {
    const Vec3 q = p - frame.origin;
    return {q.dot(frame.x_axis), q.dot(frame.y_axis), q.dot(frame.up)};
}

Box7DoF box9_to_box7(const UnifiedFrame& frame, const Box9DoF& box) {
    // Rotation of the box expressed in the unified frame.
    const Mat3 world_to_unified = Mat3::from_rows(frame.x_axis, frame.y_axis, frame.up);
    const Mat3 r = world_to_unified * box.rotation;

    // z-y-x Euler: yaw = atan2(r10, r00); ill-defined when the local x-axis is
    // vertical (|cos pitch| ~ 0).
    const double cos_pitch = std::hypot(r.at(0, 0), r.at(1, 0));
    if (cos_pitch < kDegenerateEps)
        throw Error("box: local x-axis vertical in unified frame; yaw ill-defined");

    Box7DoF out;
    out.center = transform_point(frame, box.center);
    out.size = box.size;
    out.yaw = wrap_yaw(std::atan2(r.at(1, 0), r.at(0, 0)));
    return out;
}

}  // namespace scaffold
