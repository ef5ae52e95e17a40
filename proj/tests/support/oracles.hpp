// Brute-force oracles, independent of the code paths they check.
#pragma once

#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "foldmend/intersection.hpp"
#include "foldmend/mesh.hpp"

namespace oracles {

using foldmend::Mesh;
using foldmend::Tolerances;
using foldmend::Vec3;

// All-pairs narrow phase without any broad phase: the reference for
// detect_intersections (set I and record pairs).
struct DetectOracle {
    std::set<int> intersecting;
    std::set<std::pair<int, int>> pairs;  // canonical (i < j)
};

inline DetectOracle detect_all_pairs(const Mesh& mesh, const Tolerances& tol) {
    DetectOracle out;
    const int m = mesh.face_count();
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
            int shared = 0;
            for (int u : mesh.faces[i])
                for (int v : mesh.faces[j])
                    if (u == v) ++shared;
            if (foldmend::tri_tri_intersect(mesh, i, j, shared, tol)) {
                out.pairs.insert({i, j});
                out.intersecting.insert(i);
                out.intersecting.insert(j);
            }
        }
    }
    return out;
}

// Independent line-triangle test: plane clipping plus 2D barycentric
// coordinates on the dominant projection plane. Used for hit/miss
// agreement, with the returned margins identifying grazing cases.
struct ClipHit {
    double t;
    double u1, u2;           // barycentric of v1, v2
    double margin;           // min distance of (u1, u2, 1-u1-u2, ...) to a constraint
    double t_margin;
};

inline std::optional<ClipHit> clip_line_triangle(const Vec3& p1, const Vec3& p2, const Vec3& a,
                                                 const Vec3& b, const Vec3& c,
                                                 foldmend::LineMode mode) {
    Vec3 n = cross(b - a, c - a);
    double denom = dot(n, p2 - p1);
    double scale = norm(n) * norm(p2 - p1);
    if (scale == 0.0 || std::abs(denom) <= 1e-12 * scale) return std::nullopt;
    double t = dot(n, a - p1) / denom;
    Vec3 p = p1 + t * (p2 - p1);

    // dominant axis projection
    Vec3 absn{std::abs(n.x), std::abs(n.y), std::abs(n.z)};
    int drop = absn.x >= absn.y && absn.x >= absn.z ? 0 : (absn.y >= absn.z ? 1 : 2);
    auto project = [&](const Vec3& v) {
        switch (drop) {
            case 0: return std::pair<double, double>{v.y, v.z};
            case 1: return std::pair<double, double>{v.z, v.x};
            default: return std::pair<double, double>{v.x, v.y};
        }
    };
    auto [ax, ay] = project(a);
    auto [bx, by] = project(b);
    auto [cx, cy] = project(c);
    auto [px, py] = project(p);
    double area = (bx - ax) * (cy - ay) - (cx - ax) * (by - ay);
    if (area == 0.0) return std::nullopt;
    double u1 = ((px - ax) * (cy - ay) - (cx - ax) * (py - ay)) / area;
    double u2 = ((bx - ax) * (py - ay) - (px - ax) * (by - ay)) / area;

    ClipHit hit{t, u1, u2, 0.0, 0.0};
    hit.margin = std::min({u1, u2, 1.0 - u1 - u2});
    switch (mode) {
        case foldmend::LineMode::segment: hit.t_margin = std::min(t, 1.0 - t); break;
        case foldmend::LineMode::ray: hit.t_margin = t; break;
        case foldmend::LineMode::line: hit.t_margin = 1.0; break;
    }
    if (hit.margin < 0.0 || hit.t_margin < 0.0) return std::nullopt;
    return hit;
}

// Crossing count of a ray against a face subset, deduplicating coincident
// hit points; mirrors the parity rule with independent machinery.
inline int ray_crossings(const Mesh& mesh, const std::vector<int>& faces, int origin_face,
                         const Vec3& origin, const Vec3& dir, const Tolerances& tol) {
    std::vector<Vec3> points;
    for (int g : faces) {
        if (g == origin_face) continue;
        bool shares = false;
        for (int u : mesh.faces[origin_face])
            for (int v : mesh.faces[g])
                if (u == v) shares = true;
        if (shares) continue;
        auto p = foldmend::face_points(mesh, g);
        auto hit = clip_line_triangle(origin, origin + dir, p[0], p[1], p[2],
                                      foldmend::LineMode::ray);
        if (!hit || hit->t < tol.eps_ray) continue;
        Vec3 point = origin + hit->t * dir;
        bool duplicate = false;
        for (const Vec3& q : points)
            if (foldmend::distance(point, q) <= tol.eps_point) duplicate = true;
        if (!duplicate) points.push_back(point);
    }
    return static_cast<int>(points.size());
}

// Barycentric containment of a point in a triangle, within eps of the
// plane and of the coordinate bounds.
inline bool contained_in_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c,
                                  double eps_bary, double eps_plane) {
    Vec3 n = cross(b - a, c - a);
    double nlen = norm(n);
    if (nlen == 0.0) return false;
    if (std::abs(dot(n / nlen, p - a)) > eps_plane) return false;
    double area2 = nlen * nlen;
    Vec3 ap = p - a;
    double u1 = dot(cross(ap, c - a), n) / area2;
    double u2 = dot(cross(b - a, ap), n) / area2;
    return u1 >= -eps_bary && u2 >= -eps_bary && u1 + u2 <= 1.0 + eps_bary;
}

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * norm(cross(b - a, c - a));
}

}  // namespace oracles
