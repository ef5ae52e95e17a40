// Indexed triangle mesh with derived connectivity and per-face primitives.
#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "foldmend/core.hpp"

namespace foldmend {

using Face = std::array<int, 3>;

struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<Face> faces;

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int face_count() const { return static_cast<int>(faces.size()); }
};

inline Box3 bounding_box(const Mesh& mesh) {
    Box3 box;
    for (const Vec3& v : mesh.vertices) box.expand(v);
    return box;
}

inline Tolerances make_tolerances(const Mesh& mesh) {
    return Tolerances::from_diagonal(bounding_box(mesh).diagonal());
}

inline std::array<Vec3, 3> face_points(const Mesh& mesh, int f) {
    const Face& face = mesh.faces[f];
    return {mesh.vertices[face[0]], mesh.vertices[face[1]], mesh.vertices[face[2]]};
}

// Cross product of the edge vectors in winding order; not normalized.
inline Vec3 face_normal(const Mesh& mesh, int f) {
    auto p = face_points(mesh, f);
    return cross(p[1] - p[0], p[2] - p[0]);
}

inline double face_area(const Mesh& mesh, int f) { return 0.5 * norm(face_normal(mesh, f)); }

inline Vec3 face_unit_normal(const Mesh& mesh, int f, const Tolerances& tol) {
    Vec3 n = face_normal(mesh, f);
    double len = norm(n);
    if (0.5 * len <= tol.degenerate_area)
        throw geometry_error("degenerate face " + std::to_string(f) + ": no usable normal");
    return n / len;
}

inline Vec3 face_centroid(const Mesh& mesh, int f) {
    auto p = face_points(mesh, f);
    return (p[0] + p[1] + p[2]) / 3.0;
}

inline Box3 face_box(const Mesh& mesh, int f, double eps_box) {
    Box3 box;
    for (const Vec3& p : face_points(mesh, f)) box.expand(p);
    box.inflate(eps_box);
    return box;
}

// Undirected vertex-index pair identifying an edge.
struct EdgeKey {
    int a, b;  // a < b
    EdgeKey(int u, int v) : a(std::min(u, v)), b(std::max(u, v)) {}
    friend bool operator==(const EdgeKey& l, const EdgeKey& r) { return l.a == r.a && l.b == r.b; }
    friend bool operator<(const EdgeKey& l, const EdgeKey& r) {
        return l.a != r.a ? l.a < r.a : l.b < r.b;
    }
};

struct EdgeKeyHash {
    std::size_t operator()(const EdgeKey& e) const {
        return std::hash<std::uint64_t>{}((static_cast<std::uint64_t>(e.a) << 32) ^
                                          static_cast<std::uint64_t>(static_cast<std::uint32_t>(e.b)));
    }
};

// Faces sharing an edge (two vertex indices). Symmetric; lists are sorted
// ascending. Non-manifold edges simply list every incident face.
using FaceAdjacency = std::vector<std::vector<int>>;

inline FaceAdjacency build_adjacency(const Mesh& mesh) {
    std::unordered_map<EdgeKey, std::vector<int>, EdgeKeyHash> edge_faces;
    edge_faces.reserve(mesh.faces.size() * 3);
    for (int f = 0; f < mesh.face_count(); ++f) {
        const Face& face = mesh.faces[f];
        for (int k = 0; k < 3; ++k)
            edge_faces[EdgeKey(face[k], face[(k + 1) % 3])].push_back(f);
    }
    FaceAdjacency adj(mesh.faces.size());
    for (const auto& [edge, incident] : edge_faces) {
        if (incident.size() < 2) continue;
        for (int f : incident)
            for (int g : incident)
                if (g != f) adj[f].push_back(g);
    }
    for (auto& list : adj) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
    return adj;
}

// A face edge (in winding order) not shared with any other face of the
// candidate set.
struct FreeEdge {
    int face;
    int from, to;
    friend bool operator==(const FreeEdge& l, const FreeEdge& r) {
        return l.face == r.face && l.from == r.from && l.to == r.to;
    }
};

template <typename FaceRange>
std::vector<FreeEdge> free_edges(const Mesh& mesh, const FaceRange& subset) {
    std::unordered_map<EdgeKey, int, EdgeKeyHash> edge_count;
    for (int f : subset) {
        const Face& face = mesh.faces[f];
        for (int k = 0; k < 3; ++k) ++edge_count[EdgeKey(face[k], face[(k + 1) % 3])];
    }
    std::vector<FreeEdge> result;
    std::vector<int> ordered(subset.begin(), subset.end());
    std::sort(ordered.begin(), ordered.end());
    for (int f : ordered) {
        const Face& face = mesh.faces[f];
        for (int k = 0; k < 3; ++k) {
            int u = face[k], v = face[(k + 1) % 3];
            if (edge_count.at(EdgeKey(u, v)) == 1) result.push_back({f, u, v});
        }
    }
    return result;
}

struct IngestStats {
    int duplicate_vertices_merged = 0;
    int degenerate_faces_dropped = 0;
};

// Ingest normalization: merge bitwise-identical vertices, validate indices,
// drop faces below the degeneracy threshold.
inline IngestStats normalize_mesh(Mesh& mesh) {
    IngestStats stats;
    const int original_count = mesh.vertex_count();
    for (const Face& face : mesh.faces)
        for (int idx : face)
            if (idx < 0 || idx >= original_count)
                throw geometry_error("face vertex index " + std::to_string(idx) + " out of range");

    std::map<std::array<double, 3>, int> seen;
    std::vector<int> remap(mesh.vertices.size());
    std::vector<Vec3> merged;
    merged.reserve(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Vec3& v = mesh.vertices[i];
        auto [it, inserted] = seen.try_emplace({v.x, v.y, v.z}, static_cast<int>(merged.size()));
        if (inserted)
            merged.push_back(v);
        else
            ++stats.duplicate_vertices_merged;
        remap[i] = it->second;
    }
    mesh.vertices = std::move(merged);
    for (Face& face : mesh.faces)
        for (int& idx : face) idx = remap[idx];

    const Tolerances tol = make_tolerances(mesh);
    std::vector<Face> kept;
    kept.reserve(mesh.faces.size());
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const Face& face = mesh.faces[f];
        bool distinct = face[0] != face[1] && face[1] != face[2] && face[0] != face[2];
        const Vec3 a = mesh.vertices[face[0]];
        const Vec3 b = mesh.vertices[face[1]];
        const Vec3 c = mesh.vertices[face[2]];
        double area = 0.5 * norm(cross(b - a, c - a));
        if (!distinct || area < tol.degenerate_area) {
            ++stats.degenerate_faces_dropped;
            continue;
        }
        kept.push_back(face);
    }
    mesh.faces = std::move(kept);
    return stats;
}

}  // namespace foldmend
