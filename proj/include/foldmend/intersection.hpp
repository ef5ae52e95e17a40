// Self-intersection detection: AABB broad phase, edge-vs-triangle narrow
// phase with intersection segments, and removal of intersecting and
// protruding faces.
#pragma once

#include <atomic>
#include <optional>
#include <unordered_set>
#include <vector>

#include "foldmend/mesh.hpp"

namespace foldmend {

enum class LineMode { line, ray, segment };

// Solution of the 3x3 parametric system for a line against a triangle.
struct LineHit {
    double t = 0.0;
    double u1 = 0.0, u2 = 0.0;
    Vec3 point;
};

// Solves (p1 - p2) t + (V1 - V0) u1 + (V2 - V0) u2 = p1 - V0 by Cramer's
// rule. A near-singular system (line parallel to the plane) is a miss, not
// an error. The t interval depends on the mode: segment 0 <= t <= 1, ray
// t > 0, line unrestricted.
inline std::optional<LineHit> line_triangle_intersect(const Vec3& p1, const Vec3& p2,
                                                      const Vec3& v0, const Vec3& v1,
                                                      const Vec3& v2, LineMode mode,
                                                      const Tolerances& tol) {
    const Vec3 c0 = p1 - p2;
    const Vec3 c1 = v1 - v0;
    const Vec3 c2 = v2 - v0;
    const Vec3 rhs = p1 - v0;
    const double det = det3(c0, c1, c2);
    const double scale = norm(c0) * norm(c1) * norm(c2);
    if (std::abs(det) <= tol.eps_det * scale) return std::nullopt;

    LineHit hit;
    hit.t = det3(rhs, c1, c2) / det;
    hit.u1 = det3(c0, rhs, c2) / det;
    hit.u2 = det3(c0, c1, rhs) / det;
    if (hit.u1 < -tol.eps_bary || hit.u2 < -tol.eps_bary ||
        hit.u1 + hit.u2 > 1.0 + tol.eps_bary)
        return std::nullopt;
    switch (mode) {
        case LineMode::segment:
            if (hit.t < -tol.eps_bary || hit.t > 1.0 + tol.eps_bary) return std::nullopt;
            break;
        case LineMode::ray:
            if (hit.t <= 0.0) return std::nullopt;
            break;
        case LineMode::line: break;
    }
    hit.point = p1 + hit.t * (p2 - p1);
    return hit;
}

// Plane-side rejection step of Moller's test, kept as the broad-phase
// baseline for benchmarking: a pair survives unless all three signed
// distances to the reference plane are nonzero with one sign.
inline bool plane_side_filter(const Mesh& mesh, int ref, int test) {
    const Vec3 n = face_normal(mesh, ref);
    const double d = -dot(n, mesh.vertices[mesh.faces[ref][0]]);
    double dist[3];
    for (int k = 0; k < 3; ++k) dist[k] = dot(n, mesh.vertices[mesh.faces[test][k]]) + d;
    const bool all_positive = dist[0] > 0 && dist[1] > 0 && dist[2] > 0;
    const bool all_negative = dist[0] < 0 && dist[1] < 0 && dist[2] < 0;
    return !(all_positive || all_negative);
}

struct Segment {
    Vec3 p, q;
};

namespace isect_detail {

// Collects the edge-vs-triangle hits of both triangles against each other
// and keeps the two extreme distinct points.
inline std::optional<Segment> triangle_pair_segment(const std::array<Vec3, 3>& a,
                                                    const std::array<Vec3, 3>& b,
                                                    const Tolerances& tol) {
    Vec3 hits[6];
    int hit_count = 0;
    auto collect = [&](const std::array<Vec3, 3>& edges_of, const std::array<Vec3, 3>& tri) {
        static constexpr int kEdge[3][2] = {{0, 1}, {0, 2}, {1, 2}};
        for (const auto& e : kEdge) {
            auto h = line_triangle_intersect(edges_of[e[0]], edges_of[e[1]], tri[0], tri[1],
                                             tri[2], LineMode::segment, tol);
            if (h) hits[hit_count++] = h->point;
        }
    };
    collect(b, a);
    collect(a, b);
    if (hit_count < 2) return std::nullopt;

    // extremes of the hit set; single-point (grazing) contact is discarded
    double best = 0.0;
    int bi = -1, bj = -1;
    for (int i = 0; i < hit_count; ++i)
        for (int j = i + 1; j < hit_count; ++j) {
            double d = distance(hits[i], hits[j]);
            if (d > best) {
                best = d;
                bi = i;
                bj = j;
            }
        }
    if (bi < 0 || best <= tol.eps_point) return std::nullopt;
    Segment seg{hits[bi], hits[bj]};
    // deterministic endpoint order regardless of argument order
    auto less = [](const Vec3& l, const Vec3& r) {
        if (l.x != r.x) return l.x < r.x;
        if (l.y != r.y) return l.y < r.y;
        return l.z < r.z;
    };
    if (less(seg.q, seg.p)) std::swap(seg.p, seg.q);
    return seg;
}

inline int shared_vertex_count(const Face& a, const Face& b) {
    int count = 0;
    for (int u : a)
        for (int v : b)
            if (u == v) ++count;
    return count;
}

}  // namespace isect_detail

// Intersection test between two faces. Pairs sharing one or two vertices
// (neighbors) are discarded; a contact that degenerates to a single point
// yields no segment.
inline std::optional<Segment> tri_tri_intersect(const Mesh& mesh, int fa, int fb,
                                                int shared_vertices, const Tolerances& tol) {
    if (shared_vertices >= 1) return std::nullopt;
    return isect_detail::triangle_pair_segment(face_points(mesh, fa), face_points(mesh, fb), tol);
}

// Which edge of a triangle a segment endpoint lies on, if any.
enum class SegmentAnchor { edge01 = 0, edge12 = 1, edge20 = 2, interior = 3 };

inline SegmentAnchor classify_anchor(const std::array<Vec3, 3>& tri, const Vec3& p,
                                     const Tolerances& tol) {
    static constexpr int kEdge[3][2] = {{0, 1}, {1, 2}, {2, 0}};
    double best = tol.eps_point;
    int best_edge = -1;
    for (int e = 0; e < 3; ++e) {
        const Vec3& a = tri[kEdge[e][0]];
        const Vec3& b = tri[kEdge[e][1]];
        Vec3 ab = b - a;
        double len2 = norm2(ab);
        double s = len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
        double d = distance(p, a + s * ab);
        if (d <= best) {
            best = d;
            best_edge = e;
        }
    }
    return best_edge < 0 ? SegmentAnchor::interior : static_cast<SegmentAnchor>(best_edge);
}

// One intersecting pair in canonical order (intersected < intersector),
// with the clipped segment and the edges of the intersected face its
// endpoints lie on.
struct IntersectionRecord {
    int intersected = -1;
    int intersector = -1;
    Segment segment;
    SegmentAnchor anchor_p = SegmentAnchor::interior;
    SegmentAnchor anchor_q = SegmentAnchor::interior;
};

struct DetectOptions {
    // all-pairs box testing below this face count, axis sweep above
    int sweep_threshold = 4096;
};

struct DetectResult {
    std::vector<IntersectionRecord> records;
    std::vector<int> intersecting;  // set I, ascending
};

namespace isect_detail {

inline IntersectionRecord make_record(const Mesh& mesh, int i, int j, const Segment& seg,
                                      const Tolerances& tol) {
    IntersectionRecord rec;
    rec.intersected = i;
    rec.intersector = j;
    rec.segment = seg;
    auto tri = face_points(mesh, i);
    rec.anchor_p = classify_anchor(tri, seg.p, tol);
    rec.anchor_q = classify_anchor(tri, seg.q, tol);
    return rec;
}

}  // namespace isect_detail

// Full self-intersection scan: AABB broad phase over canonical (i < j)
// pairs, narrow phase via tri_tri_intersect. Output order is canonical, so
// results are independent of scheduling.
inline DetectResult detect_intersections(const Mesh& mesh, const Tolerances& tol,
                                         const DetectOptions& opts = {}) {
    const int m = mesh.face_count();
    DetectResult result;
    if (m == 0) return result;

    std::vector<Box3> boxes(m);
    for (int f = 0; f < m; ++f) boxes[f] = face_box(mesh, f, tol.eps_box);

    std::vector<std::vector<IntersectionRecord>> buckets(m);
    if (m <= opts.sweep_threshold) {
        parallel_for(static_cast<std::size_t>(m), [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                for (int j = static_cast<int>(i) + 1; j < m; ++j) {
                    if (!aabb_overlap(boxes[i], boxes[j])) continue;
                    int shared = isect_detail::shared_vertex_count(mesh.faces[i], mesh.faces[j]);
                    auto seg = tri_tri_intersect(mesh, static_cast<int>(i), j, shared, tol);
                    if (seg)
                        buckets[i].push_back(
                            isect_detail::make_record(mesh, static_cast<int>(i), j, *seg, tol));
                }
            }
        });
    } else {
        // axis sweep on x: identical candidate set, better scaling
        std::vector<int> order(m);
        for (int f = 0; f < m; ++f) order[f] = f;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return boxes[a].lo.x < boxes[b].lo.x; });
        parallel_for(static_cast<std::size_t>(m), [&](std::size_t begin, std::size_t end) {
            for (std::size_t k = begin; k < end; ++k) {
                int a = order[k];
                for (std::size_t l = k + 1; l < static_cast<std::size_t>(m); ++l) {
                    int b = order[l];
                    if (boxes[b].lo.x > boxes[a].hi.x) break;
                    if (!aabb_overlap(boxes[a], boxes[b])) continue;
                    int i = std::min(a, b), j = std::max(a, b);
                    int shared = isect_detail::shared_vertex_count(mesh.faces[i], mesh.faces[j]);
                    auto seg = tri_tri_intersect(mesh, i, j, shared, tol);
                    if (seg) buckets[i].push_back(isect_detail::make_record(mesh, i, j, *seg, tol));
                }
            }
        });
        for (auto& bucket : buckets)
            std::sort(bucket.begin(), bucket.end(),
                      [](const IntersectionRecord& l, const IntersectionRecord& r) {
                          return l.intersector < r.intersector;
                      });
    }

    std::vector<char> in_set(m, 0);
    for (int i = 0; i < m; ++i) {
        for (auto& rec : buckets[i]) {
            in_set[rec.intersected] = 1;
            in_set[rec.intersector] = 1;
            result.records.push_back(rec);
        }
    }
    for (int f = 0; f < m; ++f)
        if (in_set[f]) result.intersecting.push_back(f);
    return result;
}

// Per-face intersector lists: every record appears on both faces' lists.
inline std::vector<std::vector<const IntersectionRecord*>> build_intersector_lists(
    int face_count, const std::vector<IntersectionRecord>& records) {
    std::vector<std::vector<const IntersectionRecord*>> lists(face_count);
    for (const auto& rec : records) {
        lists[rec.intersected].push_back(&rec);
        lists[rec.intersector].push_back(&rec);
    }
    return lists;
}

// Faces outside I with more than one neighbor, at least one of them
// intersecting, and fewer than two non-intersecting neighbors. Evaluated in
// a single pass against the original adjacency.
inline std::vector<int> protruding_faces(const Mesh& mesh, const std::vector<int>& intersecting,
                                         const FaceAdjacency& adj) {
    std::vector<char> in_set(mesh.faces.size(), 0);
    for (int f : intersecting) in_set[f] = 1;
    std::vector<int> result;
    for (int f = 0; f < mesh.face_count(); ++f) {
        if (in_set[f]) continue;
        int neighbors = static_cast<int>(adj[f].size());
        if (neighbors <= 1) continue;
        int intersecting_neighbors = 0;
        for (int g : adj[f]) intersecting_neighbors += in_set[g];
        if (intersecting_neighbors >= 1 && neighbors - intersecting_neighbors < 2)
            result.push_back(f);
    }
    return result;
}

struct RemovalResult {
    Mesh mesh;
    std::vector<int> face_map;  // old index -> new index, -1 when removed
};

// Drop a face subset, keeping relative order and the full vertex buffer.
inline RemovalResult remove_faces(const Mesh& mesh, const std::vector<int>& drop) {
    std::vector<char> dropped(mesh.faces.size(), 0);
    for (int f : drop) dropped[f] = 1;
    RemovalResult out;
    out.mesh.vertices = mesh.vertices;
    out.face_map.assign(mesh.faces.size(), -1);
    for (int f = 0; f < mesh.face_count(); ++f) {
        if (dropped[f]) continue;
        out.face_map[f] = out.mesh.face_count();
        out.mesh.faces.push_back(mesh.faces[f]);
    }
    return out;
}

}  // namespace foldmend
