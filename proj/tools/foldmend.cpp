// foldmend: detect and repair mesh surface foldings, offset meshes to
// manufacture them, and benchmark the intersection broad phase.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "foldmend/foldmend.hpp"
#include "foldmend/offset.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitNoSurface = 2;
constexpr int kExitConfig = 3;

void write_json(const fs::path& path, const nlohmann::json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw foldmend::geometry_error("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

int run_offset(const std::string& input, const std::string& output, double delta) {
    auto parsed = foldmend::load_mesh(input);
    foldmend::Mesh result = foldmend::offset_mesh(parsed.mesh, delta);
    foldmend::save_mesh(output, result);
    std::cout << "offset " << parsed.mesh.face_count() << " faces by " << delta << " -> "
              << output << "\n";
    return kExitOk;
}

int run_detect(const std::string& input, const std::string& report_path,
               const std::string& color_path) {
    auto parsed = foldmend::load_mesh(input);
    const foldmend::Mesh& mesh = parsed.mesh;
    foldmend::Tolerances tol = foldmend::make_tolerances(mesh);
    auto detection = foldmend::detect_intersections(mesh, tol);
    auto adjacency = foldmend::build_adjacency(mesh);
    auto protruding = foldmend::protruding_faces(mesh, detection.intersecting, adjacency);

    std::cout << "faces: " << mesh.face_count() << "\n"
              << "intersecting (I): " << detection.intersecting.size() << "\n"
              << "records: " << detection.records.size() << "\n"
              << "protruding (P): " << protruding.size() << "\n";

    if (!report_path.empty()) {
        nlohmann::json doc{{"schema", 1},
                           {"faces", mesh.face_count()},
                           {"intersecting", detection.intersecting.size()},
                           {"records", detection.records.size()},
                           {"protruding", protruding.size()}};
        write_json(report_path, doc);
    }
    if (!color_path.empty()) {
        foldmend::DiagnosticColoring coloring;
        for (int f : detection.intersecting) coloring.roles[f] = foldmend::FaceRole::intersecting;
        for (int f : protruding) coloring.roles[f] = foldmend::FaceRole::protruding;
        foldmend::save_mesh(color_path, mesh, &coloring);
    }
    return kExitOk;
}

int run_repair(const std::string& input, const std::string& output,
               const std::string& report_path, const std::string& dump_dir,
               const std::string& color_path, const foldmend::LabelingConfig& labeling) {
    auto parsed = foldmend::load_mesh(input);
    foldmend::PipelineConfig cfg;
    cfg.labeling = labeling;
    cfg.capture_stages = !dump_dir.empty() || !color_path.empty();

    foldmend::PipelineResult result = foldmend::run_pipeline(parsed.mesh, cfg, parsed.stats);
    foldmend::save_mesh(output, result.mesh);

    if (!dump_dir.empty()) {
        fs::create_directories(dump_dir);
        for (const foldmend::StageDump& stage : result.stages)
            foldmend::save_mesh(fs::path(dump_dir) / (stage.name + ".ply"), stage.mesh,
                                &stage.coloring);
    }
    if (!color_path.empty() && !result.stages.empty())
        foldmend::save_mesh(color_path, result.stages.back().mesh,
                            &result.stages.back().coloring);
    if (!report_path.empty()) write_json(report_path, result.report.to_json());

    const foldmend::RepairReport& rep = result.report;
    std::cout << "input: " << rep.input_faces << " faces, output: " << rep.output_faces
              << " faces\n"
              << "I=" << rep.intersecting << " P=" << rep.protruding
              << " folded=" << rep.folded_faces << " small=" << rep.small_faces
              << " reconstructed=" << rep.reconstructed << " filled=" << rep.filled << "\n"
              << "total " << rep.total_ms << " ms\n";
    if (!rep.note.empty()) std::cout << rep.note << "\n";
    return kExitOk;
}

int run_bench(const std::string& input, const std::string& report_path) {
    auto parsed = foldmend::load_mesh(input);
    foldmend::BroadphaseComparison cmp = foldmend::bench_broadphase(parsed.mesh);
    std::cout << "pairs: " << cmp.total_pairs << "\n"
              << "aabb candidates: " << cmp.aabb_candidates
              << " narrow tests: " << cmp.aabb_narrow_tests << " (" << cmp.aabb_ms << " ms)\n"
              << "plane-side candidates: " << cmp.plane_candidates
              << " narrow tests: " << cmp.plane_narrow_tests << " (" << cmp.plane_ms << " ms)\n"
              << "identical result: " << (cmp.identical() ? "yes" : "no") << "\n";
    if (!report_path.empty()) write_json(report_path, cmp.to_json());
    return cmp.identical() ? kExitOk : kExitIo;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"foldmend: recognition and repair of foldings in mesh surfaces"};
    app.require_subcommand(1);

    std::string input, output, report_path, color_path, dump_dir;
    double delta = 0.0;
    foldmend::LabelingConfig labeling;

    CLI::App* offset = app.add_subcommand("offset", "displace vertices along vertex normals");
    offset->add_option("--input", input)->required();
    offset->add_option("--output", output)->required();
    offset->add_option("--delta", delta, "signed offset distance")->required();

    CLI::App* detect = app.add_subcommand("detect", "report self-intersecting faces");
    detect->add_option("--input", input)->required();
    detect->add_option("--report", report_path, "write a JSON summary");
    detect->add_option("--color-diagnostics", color_path, "write a colored mesh");

    CLI::App* repair = app.add_subcommand("repair", "run the full folding repair pipeline");
    repair->add_option("--input", input)->required();
    repair->add_option("--output", output)->required();
    repair->add_option("--report", report_path, "write the JSON stage report");
    repair->add_option("--dump-stages", dump_dir, "write one mesh per pipeline step");
    repair->add_option("--color-diagnostics", color_path, "write the repaired mesh colored");
    repair->add_option("--fold-threshold", labeling.fold_threshold,
                       "odd-parity fraction above which a component is folded");
    repair->add_option("--small-component", labeling.small_component,
                       "insignificant component size fraction");

    CLI::App* bench = app.add_subcommand("bench", "compare AABB and plane-side broad phases");
    bench->add_option("--input", input)->required();
    bench->add_option("--report", report_path, "write a JSON comparison");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    if (labeling.fold_threshold <= 0.0 || labeling.fold_threshold >= 1.0) {
        std::cerr << "fold-threshold must be in (0, 1)\n";
        return kExitConfig;
    }
    if (labeling.small_component < 0.0 || labeling.small_component >= 1.0) {
        std::cerr << "small-component must be in [0, 1)\n";
        return kExitConfig;
    }

    try {
        if (offset->parsed()) return run_offset(input, output, delta);
        if (detect->parsed()) return run_detect(input, report_path, color_path);
        if (repair->parsed())
            return run_repair(input, output, report_path, dump_dir, color_path, labeling);
        if (bench->parsed()) return run_bench(input, report_path);
    } catch (const foldmend::no_unfolded_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNoSurface;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}
