#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "ugcl/autodiff.hpp"
#include "ugcl/errors.hpp"
#include "ugcl/matrix.hpp"

namespace ugcl {

// Divisors smaller than this are treated as zero when dehomogenizing; well
// below any pixel-scale quantity produced by the generator.
inline constexpr double kHomogeneousEps = 1e-12;

// The ten regressed quantities: focal lengths and principal point in pixels,
// baseline in meters, disparity in pixels, pitch in radians, translation in
// meters.
template <class T>
struct CameraParamsT {
    T fx{}, fy{}, px{}, py{};
    T b{}, d{};
    T theta_p{};
    T tx{}, ty{}, tz{};

    std::array<T, 10> as_array() const { return {fx, fy, px, py, b, d, theta_p, tx, ty, tz}; }

    static CameraParamsT from_array(const std::array<T, 10>& a) {
        return {a[0], a[1], a[2], a[3], a[4], a[5], a[6], a[7], a[8], a[9]};
    }
};

using CameraParams = CameraParamsT<double>;

inline constexpr std::array<const char*, 10> kParamNames = {"fx", "fy", "px", "py", "b",
                                                            "d",  "theta_p", "tx", "ty", "tz"};

// Reporting order used by MAE tables and train logs (pitch last).
inline constexpr std::array<int, 10> kTableOrder = {0, 1, 2, 3, 4, 5, 7, 8, 9, 6};

template <class T>
struct ProjectionModelT {
    Mat3<T> k;
    Mat3<T> r;
    Vec3<T> t;
    Mat34<T> p;  // k * [r|t]

    Vec4<T> row(int i) const { return p.row(i); }
    Vec3<T> col(int j) const { return p.col(j); }
};

using ProjectionModel = ProjectionModelT<double>;

template <class T>
struct FlaggedPoint {
    Vec2<T> point{};
    bool finite = false;  // false when the homogenizing divisor vanished
};

// Image-plane targets read off the projection matrix: the three vanishing
// points and the image of the world origin.
template <class T>
struct ConstraintTargetsT {
    FlaggedPoint<T> vx, vy, vz;
    FlaggedPoint<T> wc;
};

using ConstraintTargets = ConstraintTargetsT<double>;

template <class T>
Mat3<T> build_intrinsics(const CameraParamsT<T>& p) {
    if (!(value_of(p.fx) > 0.0) || !(value_of(p.fy) > 0.0)) throw NonPositiveFocal();
    Mat3<T> k;
    k.a = {p.fx, T(0), p.px, T(0), p.fy, p.py, T(0), T(0), T(1)};
    return k;
}

// Pitch-only rotation about the Y axis.
template <class T>
Mat3<T> build_rotation_pitch(const T& theta_p) {
    using std::cos;
    using std::sin;
    const T c = cos(theta_p);
    const T s = sin(theta_p);
    Mat3<T> r;
    r.a = {c, T(0), s, T(0), T(1), T(0), -s, T(0), c};
    return r;
}

template <class T>
ProjectionModelT<T> compose_projection(const CameraParamsT<T>& p) {
    ProjectionModelT<T> m;
    m.k = build_intrinsics(p);
    m.r = build_rotation_pitch(p.theta_p);
    m.t = Vec3<T>{p.tx, p.ty, p.tz};
    m.p = m.k * hstack(m.r, m.t);
    return m;
}

template <class T>
Vec2<T> project_point(const ProjectionModelT<T>& m, const Vec3<T>& point) {
    const Vec4<T> h{point.x, point.y, point.z, T(1)};
    const T w = dot(m.row(2), h);
    if (std::abs(value_of(w)) < kHomogeneousEps) throw PointAtInfinity();
    return {dot(m.row(0), h) / w, dot(m.row(1), h) / w};
}

template <class T>
FlaggedPoint<T> dehomogenize(const Vec3<T>& v) {
    if (std::abs(value_of(v.z)) < kHomogeneousEps) return {};
    return {{v.x / v.z, v.y / v.z}, true};
}

// Columns 1..3 dehomogenized. Non-finite entries are flagged, never thrown:
// vanishing points legitimately sit at infinity for axis-aligned cameras.
template <class T>
std::array<FlaggedPoint<T>, 3> vanishing_points(const ProjectionModelT<T>& m) {
    return {dehomogenize(m.col(0)), dehomogenize(m.col(1)), dehomogenize(m.col(2))};
}

// Column 4 dehomogenized: the image of the world origin.
template <class T>
FlaggedPoint<T> world_center(const ProjectionModelT<T>& m) {
    return dehomogenize(m.col(3));
}

template <class T>
ConstraintTargetsT<T> constraint_targets(const ProjectionModelT<T>& m) {
    const auto v = vanishing_points(m);
    return {v[0], v[1], v[2], world_center(m)};
}

// Five orthonormality residuals: the three pairwise row dots, the Frobenius
// distance of R*R^T from identity, and det(R) - 1. All vanish on rotations.
template <class T>
std::array<T, 5> rotation_residuals(const Mat3<T>& r) {
    const Mat3<T> rrt = r * transpose(r);
    Mat3<T> delta = rrt;
    delta(0, 0) = delta(0, 0) - T(1);
    delta(1, 1) = delta(1, 1) - T(1);
    delta(2, 2) = delta(2, 2) - T(1);
    return {dot(r.row(0), r.row(1)), dot(r.row(0), r.row(2)), dot(r.row(1), r.row(2)),
            frobenius_norm(delta), det(r) - T(1)};
}

// Norms of pairwise cross products of the first three components of the rows
// of P, taken literally. The quantity is nonzero for generic valid cameras
// (rows of P are not parallel), so it is excluded from every shipped loss
// configuration; it is kept for the `check` report and for study.
template <class T>
std::array<T, 3> axis_plane_residuals(const ProjectionModelT<T>& m) {
    const auto r3 = [&](int i) {
        const Vec4<T> row = m.row(i);
        return Vec3<T>{row.x, row.y, row.z};
    };
    const Vec3<T> p1 = r3(0), p2 = r3(1), p3 = r3(2);
    return {norm(cross(p1, p2)), norm(cross(p1, p3)), norm(cross(p2, p3))};
}

// Stereo back-projection into the camera frame. The camera-frame forward
// coordinate is x_cam = fx*b/d; the remaining two axes follow the signed
// "overall" form so the chain stays consistent with camera_to_world.
template <class T>
Vec3<T> reconstruct_camera_frame(const CameraParamsT<T>& p, const Vec2<T>& img) {
    if (!(value_of(p.d) > kHomogeneousEps)) throw ZeroDisparity();
    const T x_cam = p.fx * p.b / p.d;
    const T y_cam = -(x_cam / p.fx) * (img.x - p.px);
    const T z_cam = (x_cam / p.fy) * (p.py - img.y);
    return {x_cam, y_cam, z_cam};
}

template <class T>
Vec3<T> camera_to_world(const CameraParamsT<T>& p, const Vec3<T>& cam) {
    using std::cos;
    using std::sin;
    const T c = cos(p.theta_p);
    const T s = sin(p.theta_p);
    return {cam.x * c + cam.z * s + p.tx, cam.y + p.ty, -cam.x * s + cam.z * c + p.tz};
}

template <class T>
Vec3<T> reconstruct_3d(const CameraParamsT<T>& p, const Vec2<T>& img) {
    return camera_to_world(p, reconstruct_camera_frame(p, img));
}

// Inverse of camera_to_world.
template <class T>
Vec3<T> camera_frame_from_world(const CameraParamsT<T>& p, const Vec3<T>& world) {
    using std::cos;
    using std::sin;
    const T c = cos(p.theta_p);
    const T s = sin(p.theta_p);
    const T dx = world.x - p.tx;
    const T dy = world.y - p.ty;
    const T dz = world.z - p.tz;
    return {dx * c - dz * s, dy, dx * s + dz * c};
}

template <class T>
struct StereoObservation {
    Vec2<T> left{}, right{};
    T disparity{};
};

// Generator-convention forward model: the exact inverse of the reconstruction
// chain, so reconstruct_3d(params-with-point-disparity, left) returns the
// world point. Note this is a different map from project_point through P; the
// two conventions meet only in the loss targets, never in the correspondences.
template <class T>
StereoObservation<T> stereo_project(const CameraParamsT<T>& p, const Vec3<T>& world) {
    const Vec3<T> cam = camera_frame_from_world(p, world);
    if (std::abs(value_of(cam.x)) < kHomogeneousEps) throw PointAtInfinity();
    StereoObservation<T> obs;
    obs.disparity = p.fx * p.b / cam.x;
    obs.left = {p.px - p.fx * cam.y / cam.x, p.py - p.fy * cam.z / cam.x};
    obs.right = {obs.left.x - obs.disparity, obs.left.y};
    return obs;
}

struct DecomposedProjection {
    Mat3<double> k;
    Mat3<double> r;
    Vec3<double> t;
};

// RQ factorization of the left 3x3 block (Givens rotations), with the sign
// convention that diag(K) > 0 and det(R) = 1. Used by the `check` command to
// evaluate rotation residuals on a user-supplied matrix.
inline DecomposedProjection decompose_projection(const Mat34<double>& p) {
    Mat3<double> m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = p(r, c);
    if (det(m) < 0.0) {
        for (auto& v : m.a) v = -v;
    }

    auto givens = [](double a, double b) {
        // c,s with [c -s; s c]^T applied to (a,b) zeroing b.
        const double r = std::hypot(a, b);
        if (r < 1e-300) return std::pair<double, double>{1.0, 0.0};
        return std::pair<double, double>{a / r, b / r};
    };

    Mat3<double> k = m;
    Mat3<double> q = Mat3<double>::identity();
    // Zero (2,1), (2,0), (1,0) in turn with right-multiplied rotations.
    {
        auto [c, s] = givens(k(2, 2), k(2, 1));
        Mat3<double> g = Mat3<double>::identity();
        g(1, 1) = c; g(1, 2) = s; g(2, 1) = -s; g(2, 2) = c;
        k = k * g;
        q = transpose(g) * q;
    }
    {
        auto [c, s] = givens(k(2, 2), k(2, 0));
        Mat3<double> g = Mat3<double>::identity();
        g(0, 0) = c; g(0, 2) = s; g(2, 0) = -s; g(2, 2) = c;
        k = k * g;
        q = transpose(g) * q;
    }
    {
        auto [c, s] = givens(k(1, 1), k(1, 0));
        Mat3<double> g = Mat3<double>::identity();
        g(0, 0) = c; g(0, 1) = s; g(1, 0) = -s; g(1, 1) = c;
        k = k * g;
        q = transpose(g) * q;
    }
    // Make the diagonal of K positive.
    for (int i = 0; i < 3; ++i) {
        if (k(i, i) < 0.0) {
            for (int r = 0; r < 3; ++r) k(r, i) = -k(r, i);
            for (int c = 0; c < 3; ++c) q(i, c) = -q(i, c);
        }
    }

    // t solves K t = p4 by back substitution.
    const Vec3<double> p4 = p.col(3);
    Vec3<double> t;
    t.z = p4.z / k(2, 2);
    t.y = (p4.y - k(1, 2) * t.z) / k(1, 1);
    t.x = (p4.x - k(0, 1) * t.y - k(0, 2) * t.z) / k(0, 0);
    return {k, q, t};
}

}  // namespace ugcl
