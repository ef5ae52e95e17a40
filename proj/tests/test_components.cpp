#include <catch2/catch_amalgamated.hpp>

#include <numeric>
#include <random>

#include "foldmend/components.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace foldmend;

namespace {

std::vector<Component> fake_components(const std::vector<int>& sizes) {
    std::vector<Component> comps;
    int next = 0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        Component c;
        c.id = static_cast<int>(i);
        for (int k = 0; k < sizes[i]; ++k) c.faces.push_back(next++);
        comps.push_back(std::move(c));
    }
    return comps;
}

}  // namespace

TEST_CASE("partition basics", "[components]") {
    SECTION("two disjoint triangles") {
        Mesh m = fixtures::merge_meshes(fixtures::single_triangle(),
                                        fixtures::tetrahedron({5, 5, 5}, 0.1));
        m.faces.resize(1 + 1);  // keep one face of the tetra only
        auto comps = partition(m, build_adjacency(m));
        REQUIRE(comps.size() == 2);
        REQUIRE(comps[0].faces.size() == 1);
        REQUIRE(comps[1].faces.size() == 1);
    }
    SECTION("closed tetrahedron is one component") {
        Mesh m = fixtures::tetrahedron();
        auto comps = partition(m, build_adjacency(m));
        REQUIRE(comps.size() == 1);
        REQUIRE(comps[0].faces.size() == 4);
    }
    SECTION("vertex contact does not connect") {
        Mesh m = fixtures::two_triangles_shared_vertex();
        auto comps = partition(m, build_adjacency(m));
        REQUIRE(comps.size() == 2);
    }
}

TEST_CASE("partition orders by size then smallest member", "[components]") {
    Mesh big = fixtures::icosphere(1, 1.0);
    Mesh small = fixtures::tetrahedron({4, 0, 0});
    Mesh m = fixtures::merge_meshes(small, big);
    auto comps = partition(m, build_adjacency(m));
    REQUIRE(comps.size() == 2);
    REQUIRE(comps[0].faces.size() == big.faces.size());
    REQUIRE(comps[0].id == 0);
    REQUIRE(comps[1].faces.size() == 4);
}

TEST_CASE("ray parity on spheres", "[components]") {
    Mesh outward = fixtures::icosphere(2);
    Tolerances tol = make_tolerances(outward);
    auto comps = partition(outward, build_adjacency(outward));
    REQUIRE(comps.size() == 1);
    for (int f : {0, 17, 55, 200})
        REQUIRE(ray_parity(outward, comps[0], f, tol) == 0);

    Mesh inward = fixtures::reverse_winding(outward);
    auto rcomps = partition(inward, build_adjacency(inward));
    for (int f : {0, 17, 55, 200})
        REQUIRE(ray_parity(inward, rcomps[0], f, tol) == 1);
}

TEST_CASE("single-face components have zero parity", "[components]") {
    Mesh m = fixtures::single_triangle();
    auto comps = partition(m, build_adjacency(m));
    REQUIRE(ray_parity(m, comps[0], 0, make_tolerances(m)) == 0);
}

TEST_CASE("parity matches the independent ray oracle", "[components][property]") {
    Mesh m = fixtures::reverse_winding(fixtures::icosphere(1));
    Tolerances tol = make_tolerances(m);
    auto comps = partition(m, build_adjacency(m));
    for (int f : comps[0].faces) {
        Vec3 origin = face_centroid(m, f);
        Vec3 dir = face_unit_normal(m, f, tol);
        int expect = oracles::ray_crossings(m, comps[0].faces, f, origin, dir, tol);
        REQUIRE(ray_parity(m, comps[0], f, tol) == expect);
    }
}

TEST_CASE("labeling spheres", "[components]") {
    LabelingConfig cfg;

    Mesh outward = fixtures::icosphere(2);
    auto comps = partition(outward, build_adjacency(outward));
    label_components(outward, comps, cfg, make_tolerances(outward));
    REQUIRE(comps[0].odd_fraction == 0.0);
    REQUIRE(comps[0].label == ComponentLabel::unfolded);

    Mesh inward = fixtures::reverse_winding(outward);
    auto rcomps = partition(inward, build_adjacency(inward));
    label_components(inward, rcomps, cfg, make_tolerances(inward));
    REQUIRE(rcomps[0].odd_fraction == 1.0);
    REQUIRE(rcomps[0].label == ComponentLabel::folded);
}

TEST_CASE("an odd fraction of exactly the threshold stays unfolded", "[components]") {
    Mesh m = fixtures::one_fifth_odd_strip();
    Tolerances tol = make_tolerances(m);
    auto comps = partition(m, build_adjacency(m));
    REQUIRE(comps.size() == 1);
    REQUIRE(comps[0].faces.size() == 5);

    LabelingConfig cfg;  // threshold 0.20
    label_components(m, comps, cfg, tol);
    REQUIRE(comps[0].odd_fraction == 0.2);
    REQUIRE(comps[0].label == ComponentLabel::unfolded);

    cfg.fold_threshold = 0.19;
    label_components(m, comps, cfg, tol);
    REQUIRE(comps[0].label == ComponentLabel::folded);
}

TEST_CASE("size rule walks the sorted list", "[components]") {
    SECTION("sizes 980/15/5") {
        auto comps = fake_components({980, 15, 5});
        auto result = remove_insignificant(comps, 0.01);
        REQUIRE(result.kept == std::vector<int>{0, 1});
        REQUIRE(result.dropped == std::vector<int>{2});
    }
    SECTION("two equal halves both survive") {
        auto comps = fake_components({500, 500});
        auto result = remove_insignificant(comps, 0.01);
        REQUIRE(result.kept == std::vector<int>{0, 1});
        REQUIRE(result.dropped.empty());
    }
    SECTION("single component survives") {
        auto comps = fake_components({1000});
        auto result = remove_insignificant(comps, 0.01);
        REQUIRE(result.kept == std::vector<int>{0});
        REQUIRE(result.dropped.empty());
    }
}

TEST_CASE("folded component removal", "[components]") {
    Mesh m = fixtures::reversed_inner_sphere(1);
    Tolerances tol = make_tolerances(m);
    auto comps = partition(m, build_adjacency(m));
    REQUIRE(comps.size() == 2);
    label_components(m, comps, {}, tol);
    REQUIRE(comps[0].label == ComponentLabel::unfolded);  // outer, larger
    REQUIRE(comps[1].label == ComponentLabel::folded);

    auto sizes = remove_insignificant(comps, 0.01);
    auto kept = remove_folded(m, comps, sizes.kept);
    REQUIRE(kept.mesh.face_count() == static_cast<int>(comps[0].faces.size()));

    SECTION("nothing unfolded throws") {
        Mesh folded = fixtures::reverse_winding(fixtures::icosphere(1));
        auto fcomps = partition(folded, build_adjacency(folded));
        label_components(folded, fcomps, {}, make_tolerances(folded));
        auto fsizes = remove_insignificant(fcomps, 0.01);
        REQUIRE_THROWS_AS(remove_folded(folded, fcomps, fsizes.kept), no_unfolded_error);
    }
}

TEST_CASE("labels are stable under tiny perturbations", "[components][property]") {
    Mesh m = fixtures::reversed_inner_sphere(1);
    Tolerances tol = make_tolerances(m);
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> noise(-1e-6 * tol.diagonal, 1e-6 * tol.diagonal);
    Mesh jittered = m;
    for (Vec3& v : jittered.vertices) v += Vec3{noise(rng), noise(rng), noise(rng)};

    auto base = partition(m, build_adjacency(m));
    label_components(m, base, {}, tol);
    auto jit = partition(jittered, build_adjacency(jittered));
    label_components(jittered, jit, {}, make_tolerances(jittered));
    REQUIRE(base.size() == jit.size());
    for (std::size_t i = 0; i < base.size(); ++i) REQUIRE(base[i].label == jit[i].label);
}

TEST_CASE("winding reversal flips the label", "[components]") {
    Mesh m = fixtures::icosphere(1);
    auto comps = partition(m, build_adjacency(m));
    label_components(m, comps, {}, make_tolerances(m));

    Mesh r = fixtures::reverse_winding(m);
    auto rcomps = partition(r, build_adjacency(r));
    label_components(r, rcomps, {}, make_tolerances(r));
    REQUIRE(comps[0].label == ComponentLabel::unfolded);
    REQUIRE(rcomps[0].label == ComponentLabel::folded);
}

TEST_CASE("labeling is independent of face enumeration order", "[components][property]") {
    Mesh m = fixtures::reversed_inner_sphere(1);
    std::vector<int> perm(m.face_count());
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(5);
    std::shuffle(perm.begin(), perm.end(), rng);
    Mesh shuffled = m;
    for (int f = 0; f < m.face_count(); ++f) shuffled.faces[perm[f]] = m.faces[f];

    auto base = partition(m, build_adjacency(m));
    label_components(m, base, {}, make_tolerances(m));
    auto shuf = partition(shuffled, build_adjacency(shuffled));
    label_components(shuffled, shuf, {}, make_tolerances(shuffled));

    REQUIRE(base.size() == shuf.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        REQUIRE(base[i].label == shuf[i].label);
        std::vector<int> mapped;
        for (int f : base[i].faces) mapped.push_back(perm[f]);
        std::sort(mapped.begin(), mapped.end());
        REQUIRE(mapped == shuf[i].faces);
    }
}

TEST_CASE("partition covers the face set exactly once", "[components][property]") {
    Mesh m = fixtures::folded_ridge_strip();
    auto comps = partition(m, build_adjacency(m));
    std::vector<int> seen(m.face_count(), 0);
    for (const Component& c : comps)
        for (int f : c.faces) ++seen[f];
    for (int f = 0; f < m.face_count(); ++f) REQUIRE(seen[f] == 1);
}
