// Mesh repair: split the removed intersecting faces along their
// intersection lines, retain the fragments that stitch to the kept surface,
// and close residual gaps with vertex-fan triangles.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "foldmend/components.hpp"
#include "foldmend/intersection.hpp"
#include "foldmend/mesh.hpp"

namespace foldmend {

struct Triangle {
    std::array<Vec3, 3> v;

    Vec3 normal() const { return cross(v[1] - v[0], v[2] - v[0]); }
    Vec3 centroid() const { return (v[0] + v[1] + v[2]) / 3.0; }
    double area() const { return 0.5 * norm(normal()); }
};

inline Triangle face_triangle(const Mesh& mesh, int f) {
    auto p = face_points(mesh, f);
    return Triangle{{p[0], p[1], p[2]}};
}

namespace repair_detail {

struct PreparedSegment {
    Vec3 p, q;
    // -1 when not at a vertex / not on an edge
    int p_vertex = -1, q_vertex = -1;
    int p_edge = -1, q_edge = -1;  // edge k joins v[k] and v[(k+1)%3]
};

inline double point_edge_param(const Vec3& p, const Vec3& a, const Vec3& b) {
    Vec3 ab = b - a;
    double len2 = norm2(ab);
    return len2 > 0.0 ? std::clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
}

// Snap a point to the triangle boundary when within eps; reports vertex or
// edge classification.
inline void snap_endpoint(const Triangle& tri, Vec3& p, int& vertex, int& edge, double eps) {
    vertex = -1;
    edge = -1;
    for (int k = 0; k < 3; ++k)
        if (distance(p, tri.v[k]) <= eps) {
            p = tri.v[k];
            vertex = k;
            return;
        }
    double best = eps;
    for (int k = 0; k < 3; ++k) {
        const Vec3& a = tri.v[k];
        const Vec3& b = tri.v[(k + 1) % 3];
        double s = point_edge_param(p, a, b);
        Vec3 proj = a + s * (b - a);
        double d = distance(p, proj);
        if (d <= best) {
            best = d;
            edge = k;
        }
    }
    if (edge >= 0) {
        const Vec3& a = tri.v[edge];
        const Vec3& b = tri.v[(edge + 1) % 3];
        p = a + point_edge_param(p, a, b) * (b - a);
    }
}

// Extends an interior endpoint along the segment direction until it meets
// the triangle boundary (2D computation in the triangle plane).
inline bool extend_to_boundary(const Triangle& tri, Vec3& p, const Vec3& dir_3d, double eps) {
    Vec3 n = tri.normal();
    double nl = norm(n);
    if (nl == 0.0) return false;
    n = n / nl;
    Vec3 e1 = tri.v[1] - tri.v[0];
    e1 = e1 - dot(e1, n) * n;
    if (norm(e1) == 0.0) return false;
    e1 = normalized(e1);
    Vec3 e2 = cross(n, e1);
    auto to2d = [&](const Vec3& x) {
        Vec3 r = x - tri.v[0];
        return std::array<double, 2>{dot(r, e1), dot(r, e2)};
    };
    auto p2 = to2d(p);
    std::array<double, 2> d2{dot(dir_3d, e1), dot(dir_3d, e2)};
    double dn = std::hypot(d2[0], d2[1]);
    if (dn == 0.0) return false;
    d2 = {d2[0] / dn, d2[1] / dn};

    double best_t = std::numeric_limits<double>::max();
    int best_edge = -1;
    double best_s = 0.0;
    for (int k = 0; k < 3; ++k) {
        auto a2 = to2d(tri.v[k]);
        auto b2 = to2d(tri.v[(k + 1) % 3]);
        double ex = b2[0] - a2[0], ey = b2[1] - a2[1];
        double denom = d2[0] * ey - d2[1] * ex;
        if (std::abs(denom) < 1e-14) continue;
        double rx = a2[0] - p2[0], ry = a2[1] - p2[1];
        double t = (rx * ey - ry * ex) / denom;
        double s = (rx * d2[1] - ry * d2[0]) / denom;
        if (t <= 0.0 || s < -1e-9 || s > 1.0 + 1e-9) continue;
        if (t < best_t) {
            best_t = t;
            best_edge = k;
            best_s = std::clamp(s, 0.0, 1.0);
        }
    }
    (void)eps;
    if (best_edge < 0) return false;
    p = tri.v[best_edge] + best_s * (tri.v[(best_edge + 1) % 3] - tri.v[best_edge]);
    return true;
}

inline double point_edge_distance(const Vec3& p, const Vec3& a, const Vec3& b) {
    return distance(p, a + point_edge_param(p, a, b) * (b - a));
}

// Snap endpoints to the boundary (extending interior ones along the segment
// direction) so that every split is edge-to-edge. Degenerate or
// edge-collinear segments are a no-split.
inline std::optional<PreparedSegment> prepare_split_segment(const Triangle& tri, Vec3 p, Vec3 q,
                                                            const Tolerances& tol) {
    if (distance(p, q) <= tol.eps_point) return std::nullopt;
    PreparedSegment seg;
    Vec3 dir = normalized(q - p);

    snap_endpoint(tri, p, seg.p_vertex, seg.p_edge, tol.eps_point);
    if (seg.p_vertex < 0 && seg.p_edge < 0) {
        if (!extend_to_boundary(tri, p, Vec3{0, 0, 0} - dir, tol.eps_point)) return std::nullopt;
        snap_endpoint(tri, p, seg.p_vertex, seg.p_edge, tol.eps_point * 2);
        if (seg.p_vertex < 0 && seg.p_edge < 0) return std::nullopt;
    }
    snap_endpoint(tri, q, seg.q_vertex, seg.q_edge, tol.eps_point);
    if (seg.q_vertex < 0 && seg.q_edge < 0) {
        if (!extend_to_boundary(tri, q, dir, tol.eps_point)) return std::nullopt;
        snap_endpoint(tri, q, seg.q_vertex, seg.q_edge, tol.eps_point * 2);
        if (seg.q_vertex < 0 && seg.q_edge < 0) return std::nullopt;
    }
    if (distance(p, q) <= tol.eps_point) return std::nullopt;

    // collinear with an edge: both endpoints within eps of one edge line
    for (int k = 0; k < 3; ++k) {
        const Vec3& a = tri.v[k];
        const Vec3& b = tri.v[(k + 1) % 3];
        if (point_edge_distance(p, a, b) <= tol.eps_point &&
            point_edge_distance(q, a, b) <= tol.eps_point)
            return std::nullopt;
    }
    seg.p = p;
    seg.q = q;
    return seg;
}

}  // namespace repair_detail

// Split of one triangle along one intersection segment: the single-side
// triangle first, then the two trapezoid-side triangles. A vertex-incident
// segment yields a two-way split whose third slot is a degenerate
// placeholder, flagged for immediate discard.
struct SplitResult {
    std::array<Triangle, 3> tris;
    bool placeholder = false;  // tris[2] is filler, not geometry
};

inline std::optional<SplitResult> split_triangle(const Triangle& tri, const Vec3& seg_p,
                                                 const Vec3& seg_q, const Tolerances& tol) {
    auto prep = repair_detail::prepare_split_segment(tri, seg_p, seg_q, tol);
    if (!prep) return std::nullopt;

    // both endpoints at vertices would be an edge, rejected above
    if (prep->p_vertex >= 0 && prep->q_vertex >= 0) return std::nullopt;

    if (prep->p_vertex >= 0 || prep->q_vertex >= 0) {
        // vertex-incident: segment from vertex w to a point on the far edge
        int w = prep->p_vertex >= 0 ? prep->p_vertex : prep->q_vertex;
        Vec3 cut = prep->p_vertex >= 0 ? prep->q : prep->p;
        int cut_edge = prep->p_vertex >= 0 ? prep->q_edge : prep->p_edge;
        if (cut_edge < 0) return std::nullopt;
        int ex = cut_edge, ey = (cut_edge + 1) % 3;
        if (w == ex || w == ey) return std::nullopt;  // degenerate sliver
        SplitResult out;
        out.tris[0] = Triangle{{tri.v[w], tri.v[ex], cut}};
        out.tris[1] = Triangle{{tri.v[w], cut, tri.v[ey]}};
        out.tris[2] = Triangle{{cut, cut, tri.v[ey]}};
        out.placeholder = true;
        return out;
    }

    if (prep->p_edge < 0 || prep->q_edge < 0 || prep->p_edge == prep->q_edge)
        return std::nullopt;

    // consecutive edges (first, second) share vertex b
    int ea = prep->p_edge, eb = prep->q_edge;
    Vec3 on_a = prep->p, on_b = prep->q;
    if ((ea + 1) % 3 != eb) {
        std::swap(ea, eb);
        std::swap(on_a, on_b);
    }
    const Vec3& a = tri.v[ea];
    const Vec3& b = tri.v[(ea + 1) % 3];
    const Vec3& c = tri.v[(ea + 2) % 3];

    SplitResult out;
    out.tris[0] = Triangle{{on_a, b, on_b}};
    // trapezoid a -> on_a -> on_b -> c, cut by the shorter diagonal
    if (distance(a, on_b) <= distance(on_a, c)) {
        out.tris[1] = Triangle{{a, on_a, on_b}};
        out.tris[2] = Triangle{{a, on_b, c}};
    } else {
        out.tris[1] = Triangle{{on_a, on_b, c}};
        out.tris[2] = Triangle{{on_a, c, a}};
    }
    return out;
}

// One split event: the segment, the plane orientation data and the piece
// slots it produced.
struct SplitGroup {
    Vec3 seg_p, seg_q;
    Vec3 parent_normal;
    int single = -1;
    int trap1 = -1, trap2 = -1;  // trap2 stays -1 when the placeholder was discarded
};

struct SplitPiece {
    Triangle tri;
    int group = -1;  // group that created this piece, -1 for the original face
    int slot = -1;   // 0 single, 1/2 trapezoid side
    bool alive = true;
};

struct FaceSplit {
    int face = -1;
    std::vector<SplitPiece> pieces;
    std::vector<SplitGroup> groups;
    int placeholders = 0;
};

struct SplitSet {
    std::vector<FaceSplit> faces;
    int placeholders = 0;
};

// Iterative splitting of every intersected face against each of its
// intersectors; freshly created pieces are re-tested against the remaining
// intersectors, in bounded memory.
inline SplitSet split_all(const Mesh& mesh, const std::vector<int>& intersecting,
                          const std::vector<IntersectionRecord>& records, const Tolerances& tol) {
    auto lists = build_intersector_lists(mesh.face_count(), records);
    SplitSet out;
    out.faces.reserve(intersecting.size());
    for (int f : intersecting) {
        FaceSplit fs;
        fs.face = f;
        fs.pieces.push_back({face_triangle(mesh, f), -1, -1, true});
        for (const IntersectionRecord* rec : lists[f]) {
            int other = rec->intersected == f ? rec->intersector : rec->intersected;
            Triangle intruder = face_triangle(mesh, other);
            for (std::size_t k = 0; k < fs.pieces.size(); ++k) {
                if (!fs.pieces[k].alive) continue;
                if (fs.pieces.size() > 4096) break;  // runaway guard
                auto seg = isect_detail::triangle_pair_segment(
                    {fs.pieces[k].tri.v[0], fs.pieces[k].tri.v[1], fs.pieces[k].tri.v[2]},
                    {intruder.v[0], intruder.v[1], intruder.v[2]}, tol);
                if (!seg) continue;
                auto split = split_triangle(fs.pieces[k].tri, seg->p, seg->q, tol);
                if (!split) continue;
                int gid = static_cast<int>(fs.groups.size());
                SplitGroup group;
                group.seg_p = seg->p;
                group.seg_q = seg->q;
                group.parent_normal = fs.pieces[k].tri.normal();
                fs.pieces[k].alive = false;
                group.single = static_cast<int>(fs.pieces.size());
                fs.pieces.push_back({split->tris[0], gid, 0, true});
                group.trap1 = static_cast<int>(fs.pieces.size());
                fs.pieces.push_back({split->tris[1], gid, 1, true});
                if (split->placeholder) {
                    ++fs.placeholders;
                } else {
                    group.trap2 = static_cast<int>(fs.pieces.size());
                    fs.pieces.push_back({split->tris[2], gid, 2, true});
                }
                fs.groups.push_back(group);
            }
        }
        out.placeholders += fs.placeholders;
        out.faces.push_back(std::move(fs));
    }
    return out;
}

// A fragment retained for gap reconstruction, with its provenance.
struct ReconFace {
    Triangle tri;
    int source_face = -1;
    int generation = 0;  // number of splits above this fragment
};

struct ReconstructionSet {
    std::vector<ReconFace> faces;
};

namespace repair_detail {

struct CellKey {
    std::int64_t x, y, z;
    friend bool operator==(const CellKey& a, const CellKey& b) {
        return a.x == b.x && a.y == b.y && a.z == b.z;
    }
};

struct CellKeyHash {
    std::size_t operator()(const CellKey& k) const {
        std::size_t h = std::hash<std::int64_t>{}(k.x);
        h = h * 1000003 ^ std::hash<std::int64_t>{}(k.y);
        h = h * 1000003 ^ std::hash<std::int64_t>{}(k.z);
        return h;
    }
};

inline CellKey cell_of(const Vec3& p, double cell) {
    auto q = [cell](double v) { return static_cast<std::int64_t>(std::floor(v / cell)); };
    return {q(p.x), q(p.y), q(p.z)};
}

inline Vec3 closest_point_on_triangle(const Vec3& p, const Triangle& tri) {
    const Vec3 &a = tri.v[0], &b = tri.v[1], &c = tri.v[2];
    Vec3 ab = b - a, ac = c - a, ap = p - a;
    double d1 = dot(ab, ap), d2 = dot(ac, ap);
    if (d1 <= 0 && d2 <= 0) return a;
    Vec3 bp = p - b;
    double d3 = dot(ab, bp), d4 = dot(ac, bp);
    if (d3 >= 0 && d4 <= d3) return b;
    double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + (d1 / (d1 - d3)) * ab;
    Vec3 cp = p - c;
    double d5 = dot(ab, cp), d6 = dot(ac, cp);
    if (d6 >= 0 && d5 <= d6) return c;
    double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + (d2 / (d2 - d6)) * ac;
    double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
        double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + w * (c - b);
    }
    double denom = 1.0 / (va + vb + vc);
    return a + (vb * denom) * ab + (vc * denom) * ac;
}

// Uniform grid over the kept faces for vertex-proximity queries.
struct KeptSurface {
    const Mesh& mesh;
    std::vector<int> faces;
    double cell = 1.0;
    std::unordered_map<CellKey, std::vector<int>, CellKeyHash> grid;

    KeptSurface(const Mesh& m, const std::vector<int>& kept, const Tolerances& tol)
        : mesh(m), faces(kept) {
        double sum = 0.0;
        for (int f : faces) sum += face_box(mesh, f, 0.0).diagonal();
        cell = faces.empty() ? 1.0 : std::max(sum / faces.size(), tol.eps_point * 16 + 1e-300);
        if (cell <= 0.0) cell = 1.0;
        for (std::size_t k = 0; k < faces.size(); ++k) {
            Box3 box = face_box(mesh, faces[k], tol.eps_point);
            CellKey lo = cell_of(box.lo, cell), hi = cell_of(box.hi, cell);
            for (std::int64_t x = lo.x; x <= hi.x; ++x)
                for (std::int64_t y = lo.y; y <= hi.y; ++y)
                    for (std::int64_t z = lo.z; z <= hi.z; ++z)
                        grid[{x, y, z}].push_back(static_cast<int>(k));
        }
    }

    // Adjacency as shared edge: two of the triangle's vertices lie on one
    // kept face (within eps_point).
    bool edge_adjacent(const Triangle& tri, const Tolerances& tol) const {
        std::unordered_map<int, int> touch_count;
        for (const Vec3& v : tri.v) {
            CellKey key = cell_of(v, cell);
            std::set<int> seen;
            for (std::int64_t x = key.x - 1; x <= key.x + 1; ++x)
                for (std::int64_t y = key.y - 1; y <= key.y + 1; ++y)
                    for (std::int64_t z = key.z - 1; z <= key.z + 1; ++z) {
                        auto it = grid.find({x, y, z});
                        if (it == grid.end()) continue;
                        for (int k : it->second) seen.insert(k);
                    }
            for (int k : seen) {
                Triangle kept_tri = face_triangle(mesh, faces[k]);
                if (distance(v, closest_point_on_triangle(v, kept_tri)) <= tol.eps_point)
                    if (++touch_count[k] >= 2) return true;
            }
        }
        return false;
    }
};

}  // namespace repair_detail

// Algorithm-2 style retention, generalized to nested splits: per split
// group, the side whose named triangle touches the kept surface is
// retained. A fragment survives when it lies on the retained side of every
// decided intersection line, so the reconstruction stays within the wedge
// facing the kept surface.
inline ReconstructionSet reconstruct_gaps(const SplitSet& splits, const Mesh& mesh,
                                          const std::vector<int>& kept_faces,
                                          const Tolerances& tol) {
    repair_detail::KeptSurface surface(mesh, kept_faces, tol);
    ReconstructionSet out;
    for (const FaceSplit& fs : splits.faces) {
        std::vector<char> retain(fs.pieces.size(), 0);
        bool any_decided = false;
        for (const SplitGroup& group : fs.groups) {
            const SplitPiece& single = fs.pieces[group.single];
            const SplitPiece& trap1 = fs.pieces[group.trap1];
            int reference = -1;
            if (surface.edge_adjacent(single.tri, tol)) {
                reference = group.single;
            } else if (surface.edge_adjacent(trap1.tri, tol) ||
                       (group.trap2 >= 0 && surface.edge_adjacent(fs.pieces[group.trap2].tri, tol))) {
                reference = group.trap1;
            }
            if (reference < 0) continue;  // neither side touches the kept surface

            Vec3 plane_normal = cross(group.parent_normal, group.seg_q - group.seg_p);
            double ref_side = dot(plane_normal, fs.pieces[reference].tri.centroid() - group.seg_p);
            if (!any_decided) {
                any_decided = true;
                for (std::size_t k = 0; k < fs.pieces.size(); ++k)
                    retain[k] = fs.pieces[k].alive;
            }
            for (std::size_t k = 0; k < fs.pieces.size(); ++k) {
                if (!retain[k]) continue;
                double side = dot(plane_normal, fs.pieces[k].tri.centroid() - group.seg_p);
                if (side * ref_side <= 0.0) retain[k] = 0;
            }
        }
        for (std::size_t k = 0; k < fs.pieces.size(); ++k) {
            if (!retain[k] || !fs.pieces[k].alive) continue;
            int generation = fs.pieces[k].group >= 0 ? fs.pieces[k].group + 1 : 0;
            out.faces.push_back({fs.pieces[k].tri, fs.face, generation});
        }
    }
    return out;
}

struct AssembleResult {
    Mesh mesh;
    std::vector<int> kept_faces;   // indices into mesh.faces
    std::vector<int> recon_faces;  // indices into mesh.faces
    int degenerate_recon_dropped = 0;
};

// Merge the kept surface and the reconstruction fragments into one indexed
// mesh, deduplicating vertices by grid hashing at eps_point resolution.
inline AssembleResult assemble_output(const Mesh& mesh, const std::vector<int>& kept_faces,
                                      const ReconstructionSet& recon, const Tolerances& tol) {
    AssembleResult out;
    double cell = std::max(tol.eps_point, 1e-300);
    std::unordered_map<repair_detail::CellKey, std::vector<int>, repair_detail::CellKeyHash> grid;

    auto add_point = [&](const Vec3& p) -> int {
        repair_detail::CellKey key = repair_detail::cell_of(p, cell);
        for (std::int64_t x = key.x - 1; x <= key.x + 1; ++x)
            for (std::int64_t y = key.y - 1; y <= key.y + 1; ++y)
                for (std::int64_t z = key.z - 1; z <= key.z + 1; ++z) {
                    auto it = grid.find({x, y, z});
                    if (it == grid.end()) continue;
                    for (int idx : it->second)
                        if (distance(out.mesh.vertices[idx], p) <= tol.eps_point) return idx;
                }
        int idx = out.mesh.vertex_count();
        out.mesh.vertices.push_back(p);
        grid[key].push_back(idx);
        return idx;
    };

    for (int f : kept_faces) {
        auto p = face_points(mesh, f);
        Face face{add_point(p[0]), add_point(p[1]), add_point(p[2])};
        out.kept_faces.push_back(out.mesh.face_count());
        out.mesh.faces.push_back(face);
    }
    for (const ReconFace& rf : recon.faces) {
        Face face{add_point(rf.tri.v[0]), add_point(rf.tri.v[1]), add_point(rf.tri.v[2])};
        bool distinct = face[0] != face[1] && face[1] != face[2] && face[0] != face[2];
        if (!distinct || rf.tri.area() < tol.degenerate_area) {
            ++out.degenerate_recon_dropped;
            continue;
        }
        out.recon_faces.push_back(out.mesh.face_count());
        out.mesh.faces.push_back(face);
    }
    return out;
}

// Vertex-fan gap filling: whenever two reconstruction faces share a vertex
// but not an edge and both have a free edge at that vertex, span the vertex
// and the two far endpoints with a new face. The two free edges must bound
// an empty angular sector at the vertex, so the new face covers a genuine
// wedge gap rather than bridging across existing surface. Repeats until no
// qualifying pair remains; every new face joins the reconstruction set.
inline std::vector<int> fill_gaps(Mesh& mesh, std::vector<int>& recon_faces,
                                  const Tolerances& tol) {
    std::unordered_map<EdgeKey, int, EdgeKeyHash> edge_count;
    std::unordered_map<int, std::set<int>> vertex_neighbors;
    for (const Face& face : mesh.faces)
        for (int k = 0; k < 3; ++k) {
            int a = face[k], b = face[(k + 1) % 3];
            ++edge_count[EdgeKey(a, b)];
            vertex_neighbors[a].insert(b);
            vertex_neighbors[b].insert(a);
        }

    std::set<std::array<int, 3>> existing;
    for (const Face& face : mesh.faces) {
        std::array<int, 3> key{face[0], face[1], face[2]};
        std::sort(key.begin(), key.end());
        existing.insert(key);
    }

    std::vector<int> filled;
    std::set<int> recon_set(recon_faces.begin(), recon_faces.end());

    auto face_free_edges_at = [&](int f, int v) {
        std::vector<std::pair<int, int>> result;  // directed (from, to)
        const Face& face = mesh.faces[f];
        for (int k = 0; k < 3; ++k) {
            int a = face[k], b = face[(k + 1) % 3];
            if (a != v && b != v) continue;
            if (edge_count.at(EdgeKey(a, b)) == 1) result.push_back({a, b});
        }
        return result;
    };

    // the sector the triangle (v, far1, far2) would cover must not contain
    // any other edge incident to v
    auto sector_is_empty = [&](int v, int far1, int far2, int f1, int f2) {
        Vec3 n = Triangle{{mesh.vertices[mesh.faces[f1][0]], mesh.vertices[mesh.faces[f1][1]],
                           mesh.vertices[mesh.faces[f1][2]]}}
                     .normal() +
                 Triangle{{mesh.vertices[mesh.faces[f2][0]], mesh.vertices[mesh.faces[f2][1]],
                           mesh.vertices[mesh.faces[f2][2]]}}
                     .normal();
        double nl = norm(n);
        if (nl <= 0.0) return false;
        n = n / nl;
        const Vec3 origin = mesh.vertices[v];
        auto planar_dir = [&](int w) {
            Vec3 d = mesh.vertices[w] - origin;
            d = d - dot(d, n) * n;
            double len = norm(d);
            return len > 0.0 ? d / len : Vec3{};
        };
        Vec3 ref = planar_dir(far1);
        if (ref == Vec3{}) return false;
        Vec3 perp = cross(n, ref);
        auto angle_of = [&](int w) {
            Vec3 d = planar_dir(w);
            double a = std::atan2(dot(d, perp), dot(d, ref));
            return a < 0.0 ? a + 2.0 * M_PI : a;
        };
        double alpha = angle_of(far2);
        if (alpha <= 1e-9 || alpha >= 2.0 * M_PI - 1e-9) return false;
        double lo = alpha <= M_PI ? 0.0 : alpha;
        double hi = alpha <= M_PI ? alpha : 2.0 * M_PI;
        for (int w : vertex_neighbors.at(v)) {
            if (w == far1 || w == far2) continue;
            double a = angle_of(w);
            if (a > lo + 1e-9 && a < hi - 1e-9) return false;
        }
        return true;
    };

    while (true) {
        // vertex -> recon faces owning a free edge there
        std::map<int, std::vector<int>> by_vertex;
        for (int f : recon_set) {
            const Face& face = mesh.faces[f];
            for (int k = 0; k < 3; ++k) {
                int a = face[k], b = face[(k + 1) % 3];
                if (edge_count.at(EdgeKey(a, b)) == 1) {
                    by_vertex[a].push_back(f);
                    by_vertex[b].push_back(f);
                }
            }
        }

        struct Candidate {
            int f1, f2, v;
            double gap;  // distance between the closest far endpoints
        };
        std::vector<Candidate> candidates;
        for (auto& [v, list] : by_vertex) {
            std::sort(list.begin(), list.end());
            list.erase(std::unique(list.begin(), list.end()), list.end());
            for (std::size_t i = 0; i < list.size(); ++i)
                for (std::size_t j = i + 1; j < list.size(); ++j) {
                    int f1 = list[i], f2 = list[j];
                    const Face &fa = mesh.faces[f1], &fb = mesh.faces[f2];
                    int shared = 0;
                    for (int u : fa)
                        for (int w : fb)
                            if (u == w) ++shared;
                    if (shared != 1) continue;  // must share a vertex but not an edge
                    double gap = std::numeric_limits<double>::max();
                    for (auto& e1 : face_free_edges_at(f1, v))
                        for (auto& e2 : face_free_edges_at(f2, v)) {
                            int far1 = e1.first == v ? e1.second : e1.first;
                            int far2 = e2.first == v ? e2.second : e2.first;
                            gap = std::min(gap,
                                           distance(mesh.vertices[far1], mesh.vertices[far2]));
                        }
                    candidates.push_back({f1, f2, v, gap});
                }
        }
        // zip the narrowest wedge first; face indices break ties so the
        // order stays deterministic
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            if (a.gap != b.gap) return a.gap < b.gap;
            if (a.f1 != b.f1) return a.f1 < b.f1;
            if (a.f2 != b.f2) return a.f2 < b.f2;
            return a.v < b.v;
        });

        bool added = false;
        for (const Candidate& cand : candidates) {
            auto e1s = face_free_edges_at(cand.f1, cand.v);
            auto e2s = face_free_edges_at(cand.f2, cand.v);
            // span the narrowest wedge of the pair
            std::vector<std::pair<std::pair<int, int>, std::pair<int, int>>> combos;
            for (auto& e1 : e1s)
                for (auto& e2 : e2s) combos.push_back({e1, e2});
            std::sort(combos.begin(), combos.end(), [&](const auto& a, const auto& b) {
                auto far = [&](const std::pair<int, int>& e) {
                    return e.first == cand.v ? e.second : e.first;
                };
                double da = distance(mesh.vertices[far(a.first)], mesh.vertices[far(a.second)]);
                double db = distance(mesh.vertices[far(b.first)], mesh.vertices[far(b.second)]);
                return da < db;
            });
            for (auto& [e1, e2] : combos) {
                int far1 = e1.first == cand.v ? e1.second : e1.first;
                int far2 = e2.first == cand.v ? e2.second : e2.first;
                if (far1 == far2) continue;
                if (!sector_is_empty(cand.v, far1, far2, cand.f1, cand.f2)) continue;
                // orient against the first face's traversal of its free edge
                Face face = e1.first == cand.v ? Face{far1, cand.v, far2}
                                               : Face{cand.v, far1, far2};
                std::array<int, 3> key{face[0], face[1], face[2]};
                std::sort(key.begin(), key.end());
                if (existing.count(key)) continue;
                Triangle tri{{mesh.vertices[face[0]], mesh.vertices[face[1]],
                              mesh.vertices[face[2]]}};
                if (tri.area() < tol.degenerate_area) continue;

                int id = mesh.face_count();
                mesh.faces.push_back(face);
                existing.insert(key);
                for (int k = 0; k < 3; ++k) {
                    int a = face[k], b = face[(k + 1) % 3];
                    ++edge_count[EdgeKey(a, b)];
                    vertex_neighbors[a].insert(b);
                    vertex_neighbors[b].insert(a);
                }
                recon_set.insert(id);
                recon_faces.push_back(id);
                filled.push_back(id);
                added = true;
                break;
            }
            if (added) break;
        }
        if (!added) break;  // no progress possible
    }
    return filled;
}

}  // namespace foldmend
