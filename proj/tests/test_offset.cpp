#include <catch2/catch_amalgamated.hpp>

#include "foldmend/intersection.hpp"
#include "foldmend/offset.hpp"
#include "support/fixtures.hpp"

using namespace foldmend;

TEST_CASE("offsetting a planar mesh is a rigid translation", "[offset]") {
    Mesh m = fixtures::flat_grid(5, 5);
    Mesh moved = offset_mesh(m, 0.5);
    for (std::size_t i = 0; i < m.vertices.size(); ++i) {
        Vec3 expect = m.vertices[i] + Vec3{0, 0, 0.5};
        REQUIRE(distance(moved.vertices[i], expect) <= 1e-12);
    }
}

TEST_CASE("zero offset is the identity", "[offset]") {
    Mesh m = fixtures::icosphere(1);
    Mesh same = offset_mesh(m, 0.0);
    REQUIRE(same.faces == m.faces);
    for (std::size_t i = 0; i < m.vertices.size(); ++i)
        REQUIRE(same.vertices[i] == m.vertices[i]);
}

TEST_CASE("offsetting a fine sphere moves vertices radially", "[offset]") {
    Mesh m = fixtures::icosphere(3, 1.0);
    Mesh moved = offset_mesh(m, 0.1);
    for (const Vec3& v : moved.vertices) {
        double r = norm(v);
        REQUIRE(r >= 1.099);
        REQUIRE(r <= 1.101);
    }
}

TEST_CASE("offsetting preserves connectivity", "[offset]") {
    Mesh m = fixtures::modulated_torus();
    Mesh moved = offset_mesh(m, -0.2);
    REQUIRE(moved.faces == m.faces);
    REQUIRE(moved.vertex_count() == m.vertex_count());
}

TEST_CASE("a strong inward offset of the ridge strip provokes intersections", "[offset]") {
    Mesh folded = fixtures::folded_ridge_strip();
    Tolerances tol = make_tolerances(folded);
    auto detection = detect_intersections(folded, tol);
    REQUIRE(!detection.intersecting.empty());
}

TEST_CASE("cancelling incident normals are an error naming the vertex", "[offset]") {
    // two coincident triangles with opposite winding
    Mesh m;
    m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    m.faces = {{0, 1, 2}, {0, 2, 1}};
    try {
        vertex_normals(m);
        FAIL("expected geometry_error");
    } catch (const geometry_error& e) {
        REQUIRE(std::string(e.what()).find("vertex 0") != std::string::npos);
    }
}

TEST_CASE("isolated vertices cannot be offset", "[offset]") {
    Mesh m = fixtures::single_triangle();
    m.vertices.push_back({9, 9, 9});
    REQUIRE_THROWS_AS(offset_mesh(m, 0.1), geometry_error);
}
