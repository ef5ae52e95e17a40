// End-to-end pipeline orchestration, the machine-readable stage report and
// the broad-phase benchmark.
#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "foldmend/components.hpp"
#include "foldmend/intersection.hpp"
#include "foldmend/mesh.hpp"
#include "foldmend/mesh_io.hpp"
#include "foldmend/repair.hpp"

namespace foldmend {

struct RepairReport {
    int schema = 1;

    int input_vertices = 0;
    int input_faces = 0;
    int intersecting = 0;
    int protruding = 0;
    int components = 0;
    int folded_components = 0;
    int folded_faces = 0;
    int small_components = 0;
    int small_faces = 0;
    int reconstructed = 0;
    int filled = 0;
    int output_vertices = 0;
    int output_faces = 0;

    int placeholders_discarded = 0;
    int degenerate_faces_dropped = 0;    // ingest warning
    int duplicate_vertices_merged = 0;   // ingest warning

    double fold_threshold = 0.20;
    double small_component = 0.01;

    double detect_ms = 0.0;
    double prune_ms = 0.0;
    double partition_ms = 0.0;
    double label_ms = 0.0;
    double remove_ms = 0.0;
    double reconstruct_ms = 0.0;
    double fill_ms = 0.0;
    double assemble_ms = 0.0;
    double total_ms = 0.0;

    std::string note;

    // output = input - I - P - folded - small + reconstructed + filled
    bool count_identity_holds() const {
        return output_faces == input_faces - intersecting - protruding - folded_faces -
                                   small_faces + reconstructed + filled;
    }

    nlohmann::json to_json() const {
        return nlohmann::json{
            {"schema", schema},
            {"counts",
             {{"input_vertices", input_vertices},
              {"input_faces", input_faces},
              {"intersecting", intersecting},
              {"protruding", protruding},
              {"components", components},
              {"folded_components", folded_components},
              {"folded", folded_faces},
              {"small_components", small_components},
              {"small", small_faces},
              {"reconstructed", reconstructed},
              {"filled", filled},
              {"output_vertices", output_vertices},
              {"output_faces", output_faces}}},
            {"warnings",
             {{"degenerate_faces_dropped", degenerate_faces_dropped},
              {"duplicate_vertices_merged", duplicate_vertices_merged},
              {"placeholders_discarded", placeholders_discarded}}},
            {"thresholds",
             {{"fold_threshold", fold_threshold}, {"small_component", small_component}}},
            {"timings_ms",
             {{"detect", detect_ms},
              {"prune", prune_ms},
              {"partition", partition_ms},
              {"label", label_ms},
              {"remove", remove_ms},
              {"reconstruct", reconstruct_ms},
              {"fill", fill_ms},
              {"assemble", assemble_ms},
              {"total", total_ms}}},
            {"note", note}};
    }
};

// One colored mesh per pipeline step, mirroring the stage figures.
struct StageDump {
    std::string name;
    Mesh mesh;
    DiagnosticColoring coloring;
};

struct PipelineConfig {
    LabelingConfig labeling;
    bool capture_stages = false;
};

struct PipelineResult {
    Mesh mesh;
    RepairReport report;
    std::vector<StageDump> stages;
};

namespace pipeline_detail {

struct StageClock {
    std::chrono::steady_clock::time_point last = std::chrono::steady_clock::now();
    double lap() {
        auto now = std::chrono::steady_clock::now();
        double ms = std::chrono::duration<double, std::milli>(now - last).count();
        last = now;
        return ms;
    }
};

}  // namespace pipeline_detail

// The seven pipeline steps in order: detect, prune, partition, label,
// remove, reconstruct, fill; no stage is skipped on empty input.
inline PipelineResult run_pipeline(const Mesh& input, const PipelineConfig& cfg = {},
                                   const IngestStats& ingest = {}) {
    PipelineResult result;
    RepairReport& report = result.report;
    report.fold_threshold = cfg.labeling.fold_threshold;
    report.small_component = cfg.labeling.small_component;
    report.degenerate_faces_dropped = ingest.degenerate_faces_dropped;
    report.duplicate_vertices_merged = ingest.duplicate_vertices_merged;
    report.input_vertices = input.vertex_count();
    report.input_faces = input.face_count();

    const Tolerances tol = make_tolerances(input);
    pipeline_detail::StageClock clock;
    auto total_start = std::chrono::steady_clock::now();

    // 1. detection
    DetectResult detection = detect_intersections(input, tol);
    report.intersecting = static_cast<int>(detection.intersecting.size());
    report.detect_ms = clock.lap();

    // 2. prune intersecting and protruding faces
    FaceAdjacency adjacency = build_adjacency(input);
    std::vector<int> protruding = protruding_faces(input, detection.intersecting, adjacency);
    report.protruding = static_cast<int>(protruding.size());
    std::vector<int> prune = detection.intersecting;
    prune.insert(prune.end(), protruding.begin(), protruding.end());
    RemovalResult pruned = remove_faces(input, prune);
    report.prune_ms = clock.lap();

    if (cfg.capture_stages) {
        DiagnosticColoring coloring;
        for (int f : detection.intersecting) coloring.roles[f] = FaceRole::intersecting;
        for (int f : protruding) coloring.roles[f] = FaceRole::protruding;
        result.stages.push_back({"01_intersections", input, std::move(coloring)});
        result.stages.push_back({"02_pruned", pruned.mesh, {}});
    }

    // 3. partition into edge-connected components
    FaceAdjacency pruned_adjacency = build_adjacency(pruned.mesh);
    std::vector<Component> comps = partition(pruned.mesh, pruned_adjacency);
    report.components = static_cast<int>(comps.size());
    report.partition_ms = clock.lap();

    // 4. parity labeling
    label_components(pruned.mesh, comps, cfg.labeling, tol);
    report.label_ms = clock.lap();

    // 5. removal of folded and insignificant components
    SizeFilterResult sizes = remove_insignificant(comps, cfg.labeling.small_component);
    std::vector<char> kept_flag(comps.size(), 0);
    for (int id : sizes.kept) kept_flag[id] = 1;
    for (const Component& comp : comps) {
        if (!kept_flag[comp.id]) {
            ++report.small_components;
            report.small_faces += static_cast<int>(comp.faces.size());
        } else if (comp.label == ComponentLabel::folded) {
            ++report.folded_components;
            report.folded_faces += static_cast<int>(comp.faces.size());
        }
    }

    if (cfg.capture_stages) {
        DiagnosticColoring coloring;
        for (const Component& comp : comps)
            if (comp.label == ComponentLabel::folded)
                for (int f : comp.faces) coloring.roles[f] = FaceRole::inward;
        result.stages.push_back({"03_components", pruned.mesh, std::move(coloring)});
    }

    RemovalResult kept;
    if (pruned.mesh.face_count() == 0) {
        if (input.face_count() > 0)
            throw no_unfolded_error("no unfolded surface remains");
        kept.mesh = pruned.mesh;
    } else {
        kept = remove_folded(pruned.mesh, comps, sizes.kept);
    }
    report.remove_ms = clock.lap();

    if (cfg.capture_stages) result.stages.push_back({"04_unfolded", kept.mesh, {}});

    // 6. split the intersected faces and keep the stitching fragments
    SplitSet splits = split_all(input, detection.intersecting, detection.records, tol);
    report.placeholders_discarded = splits.placeholders;
    std::vector<int> kept_in_input;  // kept faces, in input-mesh indexing
    {
        // map pruned-mesh kept faces back to input indices
        std::vector<int> pruned_to_input(pruned.mesh.face_count(), -1);
        for (int f = 0; f < input.face_count(); ++f)
            if (pruned.face_map[f] >= 0) pruned_to_input[pruned.face_map[f]] = f;
        for (int f = 0; f < pruned.mesh.face_count(); ++f)
            if (kept.face_map[f] >= 0) kept_in_input.push_back(pruned_to_input[f]);
    }
    ReconstructionSet recon = reconstruct_gaps(splits, input, kept_in_input, tol);
    report.reconstruct_ms = clock.lap();

    // 7. assemble and fill the remaining gaps; when nothing was removed the
    // output is the input mesh itself
    AssembleResult assembled;
    if (recon.faces.empty() && static_cast<int>(kept_in_input.size()) == input.face_count()) {
        assembled.mesh = input;
        for (int f = 0; f < input.face_count(); ++f) assembled.kept_faces.push_back(f);
    } else {
        assembled = assemble_output(input, kept_in_input, recon, tol);
    }
    report.reconstructed = static_cast<int>(assembled.recon_faces.size());
    report.assemble_ms = clock.lap();

    std::vector<int> filled = fill_gaps(assembled.mesh, assembled.recon_faces, tol);
    report.filled = static_cast<int>(filled.size());
    report.fill_ms = clock.lap();

    if (cfg.capture_stages) {
        DiagnosticColoring coloring;
        for (int f : assembled.recon_faces) coloring.roles[f] = FaceRole::reconstructed;
        for (int f : filled) coloring.roles[f] = FaceRole::filled;
        result.stages.push_back({"05_repaired", assembled.mesh, std::move(coloring)});
    }

    result.mesh = std::move(assembled.mesh);
    report.output_vertices = result.mesh.vertex_count();
    report.output_faces = result.mesh.face_count();
    report.total_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                                total_start)
                          .count();
    if (detection.intersecting.empty()) {
        report.note = report.output_faces == report.input_faces
                          ? "no foldings detected"
                          : "no foldings detected; folded or insignificant components removed";
    }
    return result;
}

// Candidate-generation comparison between the AABB broad phase and the
// plane-side baseline over the identical canonical pair enumeration.
struct BroadphaseComparison {
    long total_pairs = 0;
    long aabb_candidates = 0;        // pairs passing the box test
    long plane_candidates = 0;       // pairs passing the plane-side filter
    long aabb_narrow_tests = 0;      // candidates minus vertex-sharing pairs
    long plane_narrow_tests = 0;
    std::vector<int> aabb_intersecting;
    std::vector<int> plane_intersecting;
    double aabb_ms = 0.0;
    double plane_ms = 0.0;

    bool identical() const { return aabb_intersecting == plane_intersecting; }

    nlohmann::json to_json() const {
        return nlohmann::json{{"total_pairs", total_pairs},
                              {"aabb", {{"candidates", aabb_candidates},
                                        {"narrow_tests", aabb_narrow_tests},
                                        {"intersecting", aabb_intersecting.size()},
                                        {"ms", aabb_ms}}},
                              {"plane_side", {{"candidates", plane_candidates},
                                              {"narrow_tests", plane_narrow_tests},
                                              {"intersecting", plane_intersecting.size()},
                                              {"ms", plane_ms}}},
                              {"identical_result", identical()}};
    }
};

inline BroadphaseComparison bench_broadphase(const Mesh& mesh) {
    const Tolerances tol = make_tolerances(mesh);
    const int m = mesh.face_count();
    BroadphaseComparison cmp;
    cmp.total_pairs = static_cast<long>(m) * (m - 1) / 2;

    std::vector<Box3> boxes(m);
    for (int f = 0; f < m; ++f) boxes[f] = face_box(mesh, f, tol.eps_box);

    auto run = [&](bool use_aabb, long& candidates, long& narrow_tests,
                   std::vector<int>& intersecting, double& ms) {
        auto start = std::chrono::steady_clock::now();
        std::vector<char> in_set(m, 0);
        for (int i = 0; i < m; ++i) {
            for (int j = i + 1; j < m; ++j) {
                bool candidate = use_aabb ? aabb_overlap(boxes[i], boxes[j])
                                          : plane_side_filter(mesh, i, j);
                if (!candidate) continue;
                ++candidates;
                int shared = isect_detail::shared_vertex_count(mesh.faces[i], mesh.faces[j]);
                if (shared >= 1) continue;
                ++narrow_tests;
                if (tri_tri_intersect(mesh, i, j, shared, tol)) {
                    in_set[i] = 1;
                    in_set[j] = 1;
                }
            }
        }
        for (int f = 0; f < m; ++f)
            if (in_set[f]) intersecting.push_back(f);
        ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                 .count();
    };
    run(true, cmp.aabb_candidates, cmp.aabb_narrow_tests, cmp.aabb_intersecting, cmp.aabb_ms);
    run(false, cmp.plane_candidates, cmp.plane_narrow_tests, cmp.plane_intersecting, cmp.plane_ms);
    return cmp;
}

}  // namespace foldmend
