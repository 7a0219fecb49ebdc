#pragma once

#include <array>
#include <cmath>

namespace ugcl {

// Small fixed-size vectors/matrices, templated on the scalar so the same
// geometry code runs on plain doubles and on tape variables.

template <class T>
struct Vec2 {
    T x{}, y{};
};

template <class T>
struct Vec3 {
    T x{}, y{}, z{};
};

template <class T>
struct Vec4 {
    T x{}, y{}, z{}, w{};
};

template <class T>
struct Mat3 {
    std::array<T, 9> a{};  // row-major

    T& operator()(int r, int c) { return a[3 * r + c]; }
    const T& operator()(int r, int c) const { return a[3 * r + c]; }

    Vec3<T> row(int r) const { return {a[3 * r], a[3 * r + 1], a[3 * r + 2]}; }
    Vec3<T> col(int c) const { return {a[c], a[3 + c], a[6 + c]}; }

    static Mat3 identity() {
        Mat3 m;
        m.a = {T(1), T(0), T(0), T(0), T(1), T(0), T(0), T(0), T(1)};
        return m;
    }
};

template <class T>
struct Mat34 {
    std::array<T, 12> a{};  // row-major

    T& operator()(int r, int c) { return a[4 * r + c]; }
    const T& operator()(int r, int c) const { return a[4 * r + c]; }

    Vec4<T> row(int r) const { return {a[4 * r], a[4 * r + 1], a[4 * r + 2], a[4 * r + 3]}; }
    Vec3<T> col(int c) const { return {a[c], a[4 + c], a[8 + c]}; }
};

template <class T>
Vec3<T> operator+(const Vec3<T>& u, const Vec3<T>& v) {
    return {u.x + v.x, u.y + v.y, u.z + v.z};
}

template <class T>
Vec3<T> operator-(const Vec3<T>& u, const Vec3<T>& v) {
    return {u.x - v.x, u.y - v.y, u.z - v.z};
}

template <class T>
T dot(const Vec3<T>& u, const Vec3<T>& v) {
    return u.x * v.x + u.y * v.y + u.z * v.z;
}

template <class T>
T dot(const Vec4<T>& u, const Vec4<T>& v) {
    return u.x * v.x + u.y * v.y + u.z * v.z + u.w * v.w;
}

template <class T>
Vec3<T> cross(const Vec3<T>& u, const Vec3<T>& v) {
    return {u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x};
}

template <class T>
T norm(const Vec3<T>& v) {
    using std::sqrt;
    return sqrt(dot(v, v));
}

template <class T>
Mat3<T> operator*(const Mat3<T>& lhs, const Mat3<T>& rhs) {
    Mat3<T> out;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            out(r, c) = lhs(r, 0) * rhs(0, c) + lhs(r, 1) * rhs(1, c) + lhs(r, 2) * rhs(2, c);
    return out;
}

template <class T>
Vec3<T> operator*(const Mat3<T>& m, const Vec3<T>& v) {
    return {m(0, 0) * v.x + m(0, 1) * v.y + m(0, 2) * v.z,
            m(1, 0) * v.x + m(1, 1) * v.y + m(1, 2) * v.z,
            m(2, 0) * v.x + m(2, 1) * v.y + m(2, 2) * v.z};
}

template <class T>
Mat34<T> operator*(const Mat3<T>& m, const Mat34<T>& e) {
    Mat34<T> out;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 4; ++c)
            out(r, c) = m(r, 0) * e(0, c) + m(r, 1) * e(1, c) + m(r, 2) * e(2, c);
    return out;
}

// [R|t] as a 3x4 block matrix.
template <class T>
Mat34<T> hstack(const Mat3<T>& r, const Vec3<T>& t) {
    Mat34<T> out;
    for (int row = 0; row < 3; ++row)
        for (int col = 0; col < 3; ++col)
            out(row, col) = r(row, col);
    out(0, 3) = t.x;
    out(1, 3) = t.y;
    out(2, 3) = t.z;
    return out;
}

template <class T>
Mat3<T> transpose(const Mat3<T>& m) {
    Mat3<T> out;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            out(r, c) = m(c, r);
    return out;
}

template <class T>
T det(const Mat3<T>& m) {
    return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
           m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
           m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

template <class T>
T frobenius_norm(const Mat3<T>& m) {
    using std::sqrt;
    T s = m.a[0] * m.a[0];
    for (int i = 1; i < 9; ++i) s = s + m.a[i] * m.a[i];
    return sqrt(s);
}

}  // namespace ugcl
