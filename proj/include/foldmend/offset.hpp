// Offsetting degradation operator: displace every vertex along its
// angle-weighted vertex normal by a signed distance.
#pragma once

#include <vector>

#include "foldmend/mesh.hpp"

namespace foldmend {

// Angle-weighted average of incident face normals, normalized per vertex.
// Vertices with no usable normal (isolated, or exactly cancelling incident
// normals) are an error naming the vertex.
inline std::vector<Vec3> vertex_normals(const Mesh& mesh) {
    const Tolerances tol = make_tolerances(mesh);
    std::vector<Vec3> accum(mesh.vertices.size());
    for (int f = 0; f < mesh.face_count(); ++f) {
        auto p = face_points(mesh, f);
        Vec3 n = cross(p[1] - p[0], p[2] - p[0]);
        double len = norm(n);
        if (0.5 * len <= tol.degenerate_area) continue;
        n = n / len;
        for (int k = 0; k < 3; ++k) {
            Vec3 e1 = p[(k + 1) % 3] - p[k];
            Vec3 e2 = p[(k + 2) % 3] - p[k];
            double c = dot(e1, e2) / (norm(e1) * norm(e2));
            double angle = std::acos(std::clamp(c, -1.0, 1.0));
            accum[mesh.faces[f][k]] += angle * n;
        }
    }
    for (std::size_t i = 0; i < accum.size(); ++i) {
        double len = norm(accum[i]);
        if (len <= 1e-12)
            throw geometry_error("vertex " + std::to_string(i) +
                                 " has no usable normal for offsetting");
        accum[i] = accum[i] / len;
    }
    return accum;
}

// S -> { p + delta * n(p) }. Face list is preserved; positive delta moves
// outward, negative inward. No self-intersection avoidance: provoking
// foldings is the point of this operator.
inline Mesh offset_mesh(const Mesh& mesh, double delta) {
    std::vector<Vec3> normals = vertex_normals(mesh);
    Mesh out;
    out.vertices.resize(mesh.vertices.size());
    out.faces = mesh.faces;
    parallel_for(mesh.vertices.size(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            out.vertices[i] = mesh.vertices[i] + delta * normals[i];
    });
    return out;
}

}  // namespace foldmend
