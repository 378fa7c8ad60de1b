#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace shapefilt {

using Index = std::int32_t;

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double& operator[](int c) { return c == 0 ? x : (c == 1 ? y : z); }
    double operator[](int c) const { return c == 0 ? x : (c == 1 ? y : z); }

    Point3& operator+=(const Point3& o) { x += o.x; y += o.y; z += o.z; return *this; }
    Point3& operator-=(const Point3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    Point3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend Point3 operator+(Point3 a, const Point3& b) { return a += b; }
    friend Point3 operator-(Point3 a, const Point3& b) { return a -= b; }
    friend Point3 operator*(Point3 a, double s) { return a *= s; }
    friend Point3 operator*(double s, Point3 a) { return a *= s; }
    friend bool operator==(const Point3&, const Point3&) = default;
};

inline double dot(const Point3& a, const Point3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Point3 cross(const Point3& a, const Point3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Point3& a) { return std::sqrt(dot(a, a)); }

inline double distance(const Point3& a, const Point3& b) { return norm(a - b); }

inline bool is_finite(const Point3& p) {
    return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

using Edge = std::array<Index, 2>;
using Triangle = std::array<Index, 3>;
using Tetrahedron = std::array<Index, 4>;

} // namespace shapefilt
