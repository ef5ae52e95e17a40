// Connected-component processing: edge-adjacency partitioning, ray-parity
// orientation labeling and removal of folded or insignificant components.
#pragma once

#include <vector>

#include "foldmend/intersection.hpp"
#include "foldmend/mesh.hpp"

namespace foldmend {

enum class ComponentLabel { unfolded, folded };

struct Component {
    int id = -1;
    std::vector<int> faces;  // ascending
    double odd_fraction = 0.0;
    ComponentLabel label = ComponentLabel::unfolded;
};

struct LabelingConfig {
    double fold_threshold = 0.20;   // odd fraction above this marks a fold
    double small_component = 0.01;  // insignificant-size cutoff
};

// Maximal edge-connected face groups, found with an explicit work stack
// (never call-stack recursion). Ordered by descending size, ties by
// smallest member index.
inline std::vector<Component> partition(const Mesh& mesh, const FaceAdjacency& adj) {
    std::vector<Component> comps;
    std::vector<char> visited(mesh.faces.size(), 0);
    std::vector<int> stack;
    for (int seed = 0; seed < mesh.face_count(); ++seed) {
        if (visited[seed]) continue;
        Component comp;
        stack.push_back(seed);
        visited[seed] = 1;
        while (!stack.empty()) {
            int f = stack.back();
            stack.pop_back();
            comp.faces.push_back(f);
            for (int g : adj[f]) {
                if (!visited[g]) {
                    visited[g] = 1;
                    stack.push_back(g);
                }
            }
        }
        std::sort(comp.faces.begin(), comp.faces.end());
        comps.push_back(std::move(comp));
    }
    std::sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
        if (a.faces.size() != b.faces.size()) return a.faces.size() > b.faces.size();
        return a.faces.front() < b.faces.front();
    });
    for (std::size_t i = 0; i < comps.size(); ++i) comps[i].id = static_cast<int>(i);
    return comps;
}

namespace comp_detail {

inline bool ray_hits_box(const Vec3& origin, const Vec3& inv_dir, const Box3& box) {
    double tmin = 0.0, tmax = std::numeric_limits<double>::max();
    for (int axis = 0; axis < 3; ++axis) {
        double o = origin[axis];
        double inv = inv_dir[axis];
        double lo = box.lo[axis], hi = box.hi[axis];
        if (std::isinf(inv)) {
            if (o < lo || o > hi) return false;
            continue;
        }
        double t1 = (lo - o) * inv;
        double t2 = (hi - o) * inv;
        if (t1 > t2) std::swap(t1, t2);
        tmin = std::max(tmin, t1);
        tmax = std::min(tmax, t2);
        if (tmin > tmax) return false;
    }
    return true;
}

inline bool shares_vertex(const Face& a, const Face& b) {
    for (int u : a)
        for (int v : b)
            if (u == v) return true;
    return false;
}

// Cached per-component geometry for parity rays.
struct ParityContext {
    const Mesh& mesh;
    const Component& comp;
    std::vector<Box3> boxes;

    ParityContext(const Mesh& m, const Component& c, const Tolerances& tol) : mesh(m), comp(c) {
        boxes.reserve(comp.faces.size());
        for (int f : comp.faces) boxes.push_back(face_box(mesh, f, tol.eps_box));
    }

    int crossings(int f, const Tolerances& tol) const {
        const Vec3 origin = face_centroid(mesh, f);
        const Vec3 dir = face_unit_normal(mesh, f, tol);
        const Vec3 inv_dir{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};
        std::vector<Vec3> points;
        for (std::size_t k = 0; k < comp.faces.size(); ++k) {
            int g = comp.faces[k];
            if (g == f) continue;
            if (shares_vertex(mesh.faces[f], mesh.faces[g])) continue;
            if (!ray_hits_box(origin, inv_dir, boxes[k])) continue;
            auto tri = face_points(mesh, g);
            auto hit = line_triangle_intersect(origin, origin + dir, tri[0], tri[1], tri[2],
                                               LineMode::ray, tol);
            if (!hit || hit->t < tol.eps_ray) continue;
            bool duplicate = false;
            for (const Vec3& p : points)
                if (distance(p, hit->point) <= tol.eps_point) {
                    duplicate = true;
                    break;
                }
            if (!duplicate) points.push_back(hit->point);
        }
        return static_cast<int>(points.size());
    }
};

}  // namespace comp_detail

// Number of distinct crossings of the centroid-normal ray of face f with the
// other faces of its component. Faces sharing a vertex with f are skipped, as
// are hits closer than eps_ray along the ray.
inline int ray_parity(const Mesh& mesh, const Component& comp, int f, const Tolerances& tol) {
    comp_detail::ParityContext ctx(mesh, comp, tol);
    return ctx.crossings(f, tol);
}

// Computes each component's odd fraction and applies the threshold vote:
// a fraction of fold_threshold or less keeps the component unfolded.
inline void label_components(const Mesh& mesh, std::vector<Component>& comps,
                             const LabelingConfig& cfg, const Tolerances& tol) {
    for (Component& comp : comps) {
        comp_detail::ParityContext ctx(mesh, comp, tol);
        std::vector<char> odd(comp.faces.size(), 0);
        parallel_for(comp.faces.size(), [&](std::size_t begin, std::size_t end) {
            for (std::size_t k = begin; k < end; ++k)
                odd[k] = static_cast<char>(ctx.crossings(comp.faces[k], tol) % 2);
        });
        long odd_count = 0;
        for (char o : odd) odd_count += o;
        comp.odd_fraction =
            comp.faces.empty() ? 0.0 : static_cast<double>(odd_count) / comp.faces.size();
        // inclusive threshold, robust to the division above
        bool unfolded = static_cast<double>(odd_count) <=
                        cfg.fold_threshold * static_cast<double>(comp.faces.size()) + 1e-9;
        comp.label = unfolded ? ComponentLabel::unfolded : ComponentLabel::folded;
    }
}

struct SizeFilterResult {
    std::vector<int> kept;     // component ids
    std::vector<int> dropped;  // component ids
};

// Size rule: walk the components largest first, accumulating face counts;
// once the cumulative count reaches (1 - small) of the total, every later
// component is dropped.
inline SizeFilterResult remove_insignificant(const std::vector<Component>& comps, double small) {
    std::size_t total = 0;
    for (const Component& c : comps) total += c.faces.size();
    const double threshold = (1.0 - small) * static_cast<double>(total);
    const double slack = 1e-9 * static_cast<double>(total);
    SizeFilterResult result;
    double cumulative = 0.0;
    for (const Component& c : comps) {
        if (cumulative + slack >= threshold) {
            result.dropped.push_back(c.id);
        } else {
            result.kept.push_back(c.id);
            cumulative += static_cast<double>(c.faces.size());
        }
    }
    return result;
}

// Mesh containing only the faces of kept, unfolded components. Errors out
// when nothing unfolded remains (over-aggressive deformation).
inline RemovalResult remove_folded(const Mesh& mesh, const std::vector<Component>& comps,
                                   const std::vector<int>& kept_ids) {
    std::vector<char> kept(comps.size(), 0);
    for (int id : kept_ids) kept[id] = 1;
    std::vector<int> drop;
    for (const Component& comp : comps)
        if (!kept[comp.id] || comp.label == ComponentLabel::folded)
            drop.insert(drop.end(), comp.faces.begin(), comp.faces.end());
    if (mesh.face_count() > 0 && static_cast<int>(drop.size()) == mesh.face_count())
        throw no_unfolded_error("no unfolded surface remains");
    return remove_faces(mesh, drop);
}

}  // namespace foldmend
