// Mesh fixtures shared by the unit and acceptance suites.
#pragma once

#include <cmath>
#include <map>
#include <random>

#include "foldmend/mesh.hpp"
#include "foldmend/offset.hpp"

namespace fixtures {

using foldmend::Face;
using foldmend::Mesh;
using foldmend::Vec3;

inline Mesh single_triangle() {
    Mesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    m.faces = {{0, 1, 2}};
    return m;
}

// Two triangles sharing the edge (1, 2).
inline Mesh two_triangles_shared_edge() {
    Mesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
    m.faces = {{0, 1, 2}, {1, 3, 2}};
    return m;
}

// Two triangles sharing only vertex 0.
inline Mesh two_triangles_shared_vertex() {
    Mesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}};
    m.faces = {{0, 1, 2}, {0, 3, 4}};
    return m;
}

// Closed tetrahedron, outward CCW winding.
inline Mesh tetrahedron(const Vec3& offset = {0, 0, 0}, double scale = 1.0) {
    Mesh m;
    std::vector<Vec3> base = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (const Vec3& v : base) m.vertices.push_back(offset + scale * v);
    m.faces = {{0, 2, 1}, {0, 1, 3}, {0, 3, 2}, {1, 2, 3}};
    return m;
}

inline Mesh reverse_winding(Mesh m) {
    for (Face& f : m.faces) std::swap(f[1], f[2]);
    return m;
}

inline Mesh merge_meshes(const Mesh& a, const Mesh& b) {
    Mesh m = a;
    int base = m.vertex_count();
    for (const Vec3& v : b.vertices) m.vertices.push_back(v);
    for (const Face& f : b.faces) m.faces.push_back({f[0] + base, f[1] + base, f[2] + base});
    return m;
}

// Planar grid in z = 0, CCW with +z normals. nx x ny vertices.
inline Mesh flat_grid(int nx, int ny, double lx = 1.0, double ly = 1.0) {
    Mesh m;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            m.vertices.push_back({lx * i / (nx - 1), ly * j / (ny - 1), 0.0});
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            int a = j * nx + i, b = a + 1, c = a + nx, d = c + 1;
            m.faces.push_back({a, b, d});
            m.faces.push_back({a, d, c});
        }
    return m;
}

// Grid with a Gaussian ridge along x; an inward offset beyond the ridge
// curvature radius folds the crest into the flanks.
inline Mesh ridge_strip(int nx, int ny, double lx = 4.0, double ly = 4.0, double height = 1.0,
                        double sigma = 0.35) {
    Mesh m;
    for (int j = 0; j < ny; ++j) {
        double y = -ly / 2 + ly * j / (ny - 1);
        for (int i = 0; i < nx; ++i) {
            double x = lx * i / (nx - 1);
            m.vertices.push_back({x, y, height * std::exp(-y * y / (2 * sigma * sigma))});
        }
    }
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            int a = j * nx + i, b = a + 1, c = a + nx, d = c + 1;
            m.faces.push_back({a, b, d});
            m.faces.push_back({a, d, c});
        }
    return m;
}

inline Mesh folded_ridge_strip(int nx = 17, int ny = 17, double delta = -0.4) {
    return foldmend::offset_mesh(ridge_strip(nx, ny), delta);
}

// Icosphere: subdivided icosahedron projected to radius r.
inline Mesh icosphere(int subdivisions, double radius = 1.0) {
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    Mesh m;
    m.vertices = {{-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
                  {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
                  {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1}};
    for (Vec3& v : m.vertices) v = radius * normalized(v);
    m.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
               {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
               {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
               {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            Vec3 p = radius * normalized(0.5 * (m.vertices[a] + m.vertices[b]));
            int idx = m.vertex_count();
            m.vertices.push_back(p);
            midpoint[key] = idx;
            return idx;
        };
        std::vector<Face> next;
        next.reserve(m.faces.size() * 4);
        for (const Face& f : m.faces) {
            int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        m.faces = std::move(next);
    }
    return m;
}

// Two dual tetrahedra sharing a centroid: every face intersects faces of
// the other tetrahedron.
inline Mesh interpenetrating_tetrahedra() {
    Mesh a, b;
    a.vertices = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    b.vertices = {{-1, -1, -1}, {-1, 1, 1}, {1, -1, 1}, {1, 1, -1}};
    a.faces = b.faces = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
    auto orient_outward = [](Mesh& m) {
        Vec3 centroid{0, 0, 0};
        for (const Vec3& v : m.vertices) centroid += v;
        centroid = centroid / static_cast<double>(m.vertices.size());
        for (Face& f : m.faces) {
            Vec3 n = cross(m.vertices[f[1]] - m.vertices[f[0]],
                           m.vertices[f[2]] - m.vertices[f[0]]);
            Vec3 mid = (m.vertices[f[0]] + m.vertices[f[1]] + m.vertices[f[2]]) / 3.0;
            if (dot(n, mid - centroid) < 0) std::swap(f[1], f[2]);
        }
    };
    orient_outward(a);
    orient_outward(b);
    return merge_meshes(a, b);
}

// Torus with a modulated tube radius; an inward offset past the thin
// sections inverts them and folds the transitions.
inline Mesh modulated_torus(int nu = 36, int nv = 10, double ring_radius = 1.0,
                            double tube_radius = 0.28, double modulation = 0.12, int lobes = 3) {
    Mesh m;
    for (int i = 0; i < nu; ++i) {
        double u = 2 * M_PI * i / nu;
        double r = tube_radius + modulation * std::cos(lobes * u);
        for (int j = 0; j < nv; ++j) {
            double v = 2 * M_PI * j / nv;
            m.vertices.push_back({(ring_radius + r * std::cos(v)) * std::cos(u),
                                  (ring_radius + r * std::cos(v)) * std::sin(u),
                                  r * std::sin(v)});
        }
    }
    for (int i = 0; i < nu; ++i)
        for (int j = 0; j < nv; ++j) {
            int a = i * nv + j;
            int b = ((i + 1) % nu) * nv + j;
            int c = i * nv + (j + 1) % nv;
            int d = ((i + 1) % nu) * nv + (j + 1) % nv;
            m.faces.push_back({a, b, d});
            m.faces.push_back({a, d, c});
        }
    return m;
}

inline Mesh folded_torus(double delta = -0.2) {
    return foldmend::offset_mesh(modulated_torus(), delta);
}

// Outer sphere plus an inner sphere with reversed winding: a folded
// component without any self-intersection.
inline Mesh reversed_inner_sphere(int subdivisions = 2) {
    Mesh outer = icosphere(subdivisions, 1.0);
    Mesh inner = reverse_winding(icosphere(subdivisions, 0.5));
    return merge_meshes(outer, inner);
}

// Random triangle soup with non-degenerate faces.
inline Mesh random_soup(unsigned seed, int face_count, double extent = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coord(0.0, extent);
    Mesh m;
    while (m.face_count() < face_count) {
        Vec3 a{coord(rng), coord(rng), coord(rng)};
        Vec3 b{coord(rng), coord(rng), coord(rng)};
        Vec3 c{coord(rng), coord(rng), coord(rng)};
        if (0.5 * norm(cross(b - a, c - a)) < 1e-6 * extent * extent) continue;
        int base = m.vertex_count();
        m.vertices.push_back(a);
        m.vertices.push_back(b);
        m.vertices.push_back(c);
        m.faces.push_back({base, base + 1, base + 2});
    }
    return m;
}

// Five-face strip with exactly one odd-parity member: T4 curls under the
// strip and its normal ray crosses T1 once.
inline Mesh one_fifth_odd_strip() {
    Mesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0},
                  {2, 0, 0}, {2, 1, 0}, {-2, 0.5, -1}};
    m.faces = {{0, 1, 2},   // T0
               {1, 3, 2},   // T1: ray target
               {1, 4, 3},   // T2
               {4, 5, 3},   // T3
               {4, 5, 6}};  // T4: curls under, hits T1
    return m;
}

}  // namespace fixtures
