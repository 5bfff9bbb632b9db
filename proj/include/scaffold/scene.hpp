#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace scaffold {

/// Toolkit-wide error type. Messages name the offending object/field where known.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Numeric tolerances shared across the toolkit.
inline constexpr double kDegenerateEps = 1e-6;   // coincident anchors, vertical optical axis, gimbal
inline constexpr double kRotationTol = 1e-6;     // orthonormality of input rotations
inline constexpr double kFrameTol = 1e-9;        // unit length / orthogonality of derived frames

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    Vec2 xy() const { return {x, y}; }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

/// 3x3 matrix, row-major storage.
struct Mat3 {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Mat3 identity() { return Mat3{}; }
    static Mat3 rotation_z(double angle);
    static Mat3 rotation_y(double angle);
    static Mat3 rotation_x(double angle);
    /// Matrix whose rows are the given vectors.
    static Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2);

    double at(int r, int c) const { return m[static_cast<size_t>(r) * 3 + static_cast<size_t>(c)]; }
    double& at(int r, int c) { return m[static_cast<size_t>(r) * 3 + static_cast<size_t>(c)]; }
    Vec3 col(int c) const { return {at(0, c), at(1, c), at(2, c)}; }
    Vec3 row(int r) const { return {at(r, 0), at(r, 1), at(r, 2)}; }

    Vec3 operator*(const Vec3& v) const;
    Mat3 operator*(const Mat3& o) const;
    Mat3 transposed() const;
    double determinant() const;
    /// True when M^T M = I and det = +1 within tol.
    bool is_rotation(double tol = kRotationTol) const;
};

/// Box extents along the object's local x/y/z axes, meters.
struct Size3 {
    double l = 0.0;
    double w = 0.0;
    double h = 0.0;
};

/// Oriented 3D box: center plus local extents plus object-to-world rotation.
struct Box9DoF {
    Vec3 center;
    Size3 size;
    Mat3 rotation;
};

/// One camera pose (camera-to-world). The optical axis is the camera-local +z
/// direction, i.e. rotation * (0, 0, 1).
struct CameraFrame {
    int index = 0;
    Mat3 rotation;
    Vec3 translation;
};

struct ObjectRecord {
    std::string id;
    std::string category;
    Box9DoF box;
    std::optional<int> first_frame;
};

struct Scene {
    std::string scene_id;
    std::vector<ObjectRecord> objects;
    std::vector<CameraFrame> trajectory;

    /// nullptr when the id is absent.
    const ObjectRecord* find(const std::string& id) const;
    /// Throws Error when the id is absent.
    const ObjectRecord& at(const std::string& id) const;
};

/// Parses and validates a scene document. Object order is preserved.
/// Document format: {scene_id, objects[], trajectory[]?}; object
/// {id, category, center:[x,y,z], size:[l,w,h], rotation:[9 row-major], first_frame?};
/// camera {index, rotation:[9 row-major], translation:[x,y,z]}. Lengths in meters.
Scene parse_scene(const std::string& text);

/// Inverse of parse_scene on validated scenes (field-for-field).
std::string serialize_scene(const Scene& scene);

/// Validates scene invariants; throws Error naming the object and field.
void check_scene(const Scene& scene);

/// Euclidean distance between 3D box centers, meters.
double center_distance(const ObjectRecord& a, const ObjectRecord& b);

}  // namespace scaffold
