// Mesh parsing and serialization: Wavefront OBJ, OFF and ASCII PLY, with
// optional per-face diagnostic coloring and double round-trip output.
#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "foldmend/mesh.hpp"

namespace foldmend {

enum class MeshFormat { obj, off, ply };

struct parse_error : std::runtime_error {
    std::size_t line;
    parse_error(const std::string& what, std::size_t line_number)
        : std::runtime_error("line " + std::to_string(line_number) + ": " + what), line(line_number) {}
};

// Pipeline role of a face, for colored diagnostic exports.
enum class FaceRole { unfolded, intersecting, inward, protruding, reconstructed, filled };

inline std::array<unsigned char, 3> role_color(FaceRole role) {
    switch (role) {
        case FaceRole::unfolded: return {180, 180, 180};
        case FaceRole::intersecting: return {0, 200, 0};
        case FaceRole::inward: return {220, 30, 30};
        case FaceRole::protruding: return {255, 140, 0};
        case FaceRole::reconstructed: return {40, 90, 230};
        case FaceRole::filled: return {250, 220, 40};
    }
    return {0, 0, 0};
}

inline const char* role_name(FaceRole role) {
    switch (role) {
        case FaceRole::unfolded: return "unfolded";
        case FaceRole::intersecting: return "intersecting";
        case FaceRole::inward: return "inward";
        case FaceRole::protruding: return "protruding";
        case FaceRole::reconstructed: return "reconstructed";
        case FaceRole::filled: return "filled";
    }
    return "unknown";
}

struct DiagnosticColoring {
    std::map<int, FaceRole> roles;  // face index -> role; absent means unfolded
};

struct ParseResult {
    Mesh mesh;
    IngestStats stats;
};

namespace io_detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline double parse_double(std::string_view tok, std::size_t line) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw parse_error("malformed number '" + std::string(tok) + "'", line);
    if (!std::isfinite(value))
        throw parse_error("non-finite coordinate '" + std::string(tok) + "'", line);
    return value;
}

inline long parse_long(std::string_view tok, std::size_t line) {
    long value = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw parse_error("malformed integer '" + std::string(tok) + "'", line);
    return value;
}

// Reads lines, skipping blank ones; '#' starts a comment.
struct LineReader {
    std::string_view text;
    std::size_t pos = 0;
    std::size_t line = 0;

    std::optional<std::string_view> next(bool strip_comments = true) {
        while (pos < text.size()) {
            std::size_t end = text.find('\n', pos);
            if (end == std::string_view::npos) end = text.size();
            std::string_view raw = text.substr(pos, end - pos);
            pos = end + 1;
            ++line;
            if (strip_comments) {
                std::size_t hash = raw.find('#');
                if (hash != std::string_view::npos) raw = raw.substr(0, hash);
            }
            raw = trim(raw);
            if (!raw.empty()) return raw;
        }
        return std::nullopt;
    }
};

inline void append_fan(Mesh& mesh, const std::vector<int>& poly) {
    for (std::size_t k = 1; k + 1 < poly.size(); ++k)
        mesh.faces.push_back({poly[0], poly[static_cast<int>(k)], poly[k + 1]});
}

inline Mesh parse_obj(std::string_view text) {
    Mesh mesh;
    LineReader reader{text};
    while (auto line = reader.next()) {
        auto toks = split_ws(*line);
        if (toks.empty()) continue;
        if (toks[0] == "v") {
            if (toks.size() < 4) throw parse_error("vertex needs three coordinates", reader.line);
            mesh.vertices.push_back({parse_double(toks[1], reader.line),
                                     parse_double(toks[2], reader.line),
                                     parse_double(toks[3], reader.line)});
        } else if (toks[0] == "f") {
            if (toks.size() < 4) throw parse_error("face needs at least three vertices", reader.line);
            std::vector<int> poly;
            for (std::size_t k = 1; k < toks.size(); ++k) {
                std::string_view ref = toks[k];
                std::size_t slash = ref.find('/');
                if (slash != std::string_view::npos) ref = ref.substr(0, slash);
                long idx = parse_long(ref, reader.line);
                if (idx < 0) idx = static_cast<long>(mesh.vertices.size()) + idx;  // relative
                else if (idx > 0) idx -= 1;                                        // 1-based
                else throw parse_error("face index 0 is not valid in OBJ", reader.line);
                if (idx < 0 || idx >= static_cast<long>(mesh.vertices.size()))
                    throw parse_error("face index out of range", reader.line);
                poly.push_back(static_cast<int>(idx));
            }
            append_fan(mesh, poly);
        }
        // usemtl / mtllib / vn / vt / g / o / s: no geometric content
    }
    return mesh;
}

inline Mesh parse_off(std::string_view text) {
    Mesh mesh;
    LineReader reader{text};
    auto header = reader.next();
    if (!header) throw parse_error("empty OFF stream", reader.line);
    auto toks = split_ws(*header);
    if (toks[0] != "OFF") throw parse_error("missing OFF header", reader.line);
    // counts may follow the keyword or sit on the next line
    if (toks.size() == 1) {
        auto counts = reader.next();
        if (!counts) throw parse_error("missing OFF counts", reader.line);
        toks = split_ws(*counts);
    } else {
        toks.erase(toks.begin());
    }
    if (toks.size() < 2) throw parse_error("OFF counts need vertices and faces", reader.line);
    long nv = parse_long(toks[0], reader.line);
    long nf = parse_long(toks[1], reader.line);
    if (nv < 0 || nf < 0) throw parse_error("negative OFF counts", reader.line);
    for (long i = 0; i < nv; ++i) {
        auto line = reader.next();
        if (!line) throw parse_error("truncated OFF vertex list", reader.line);
        auto vt = split_ws(*line);
        if (vt.size() < 3) throw parse_error("vertex needs three coordinates", reader.line);
        mesh.vertices.push_back({parse_double(vt[0], reader.line), parse_double(vt[1], reader.line),
                                 parse_double(vt[2], reader.line)});
    }
    for (long i = 0; i < nf; ++i) {
        auto line = reader.next();
        if (!line) throw parse_error("truncated OFF face list", reader.line);
        auto ft = split_ws(*line);
        if (ft.empty()) throw parse_error("empty face row", reader.line);
        long k = parse_long(ft[0], reader.line);
        if (k < 3) throw parse_error("face needs at least three vertices", reader.line);
        if (static_cast<long>(ft.size()) < 1 + k) throw parse_error("truncated face row", reader.line);
        std::vector<int> poly;
        for (long j = 0; j < k; ++j) {
            long idx = parse_long(ft[1 + j], reader.line);
            if (idx < 0 || idx >= nv) throw parse_error("face index out of range", reader.line);
            poly.push_back(static_cast<int>(idx));
        }
        append_fan(mesh, poly);
    }
    return mesh;
}

struct PlyProperty {
    std::string name;
    bool is_list = false;
};

inline Mesh parse_ply(std::string_view text) {
    Mesh mesh;
    LineReader reader{text};
    auto magic = reader.next(false);
    if (!magic || trim(*magic) != "ply") throw parse_error("missing ply header", reader.line);

    struct Element {
        std::string name;
        long count = 0;
        std::vector<PlyProperty> props;
    };
    std::vector<Element> elements;
    bool ascii = false;
    while (true) {
        auto line = reader.next(false);
        if (!line) throw parse_error("unterminated ply header", reader.line);
        auto toks = split_ws(*line);
        if (toks.empty()) continue;
        if (toks[0] == "comment") continue;
        if (toks[0] == "format") {
            if (toks.size() < 2 || toks[1] != "ascii")
                throw parse_error("only ascii ply is supported", reader.line);
            ascii = true;
        } else if (toks[0] == "element") {
            if (toks.size() < 3) throw parse_error("malformed element", reader.line);
            elements.push_back({std::string(toks[1]), parse_long(toks[2], reader.line), {}});
        } else if (toks[0] == "property") {
            if (elements.empty() || toks.size() < 3)
                throw parse_error("property outside element", reader.line);
            if (toks[1] == "list") {
                if (toks.size() < 5) throw parse_error("malformed list property", reader.line);
                elements.back().props.push_back({std::string(toks[4]), true});
            } else {
                elements.back().props.push_back({std::string(toks[2]), false});
            }
        } else if (toks[0] == "end_header") {
            break;
        } else {
            throw parse_error("unrecognized header line", reader.line);
        }
    }
    if (!ascii) throw parse_error("ply format line missing", reader.line);

    for (const Element& elem : elements) {
        if (elem.name == "vertex") {
            int ix = -1, iy = -1, iz = -1;
            for (std::size_t p = 0; p < elem.props.size(); ++p) {
                if (elem.props[p].name == "x") ix = static_cast<int>(p);
                if (elem.props[p].name == "y") iy = static_cast<int>(p);
                if (elem.props[p].name == "z") iz = static_cast<int>(p);
            }
            if (ix < 0 || iy < 0 || iz < 0)
                throw parse_error("vertex element lacks x/y/z", reader.line);
            for (long i = 0; i < elem.count; ++i) {
                auto line = reader.next();
                if (!line) throw parse_error("truncated vertex list", reader.line);
                auto toks = split_ws(*line);
                if (toks.size() < elem.props.size())
                    throw parse_error("short vertex row", reader.line);
                mesh.vertices.push_back({parse_double(toks[ix], reader.line),
                                         parse_double(toks[iy], reader.line),
                                         parse_double(toks[iz], reader.line)});
            }
        } else if (elem.name == "face") {
            int list_prop = -1;
            for (std::size_t p = 0; p < elem.props.size(); ++p)
                if (elem.props[p].is_list &&
                    (elem.props[p].name == "vertex_indices" || elem.props[p].name == "vertex_index"))
                    list_prop = static_cast<int>(p);
            if (list_prop != 0)
                throw parse_error("face element must start with a vertex index list", reader.line);
            for (long i = 0; i < elem.count; ++i) {
                auto line = reader.next();
                if (!line) throw parse_error("truncated face list", reader.line);
                auto toks = split_ws(*line);
                if (toks.empty()) throw parse_error("empty face row", reader.line);
                long k = parse_long(toks[0], reader.line);
                if (k < 3) throw parse_error("face needs at least three vertices", reader.line);
                if (static_cast<long>(toks.size()) < 1 + k)
                    throw parse_error("truncated face row", reader.line);
                std::vector<int> poly;
                for (long j = 0; j < k; ++j) {
                    long idx = parse_long(toks[1 + j], reader.line);
                    if (idx < 0 || idx >= static_cast<long>(mesh.vertices.size()))
                        throw parse_error("face index out of range", reader.line);
                    poly.push_back(static_cast<int>(idx));
                }
                append_fan(mesh, poly);
            }
        } else {
            for (long i = 0; i < elem.count; ++i)
                if (!reader.next()) throw parse_error("truncated element", reader.line);
        }
    }
    return mesh;
}

inline void format_coord(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

inline void append_vec(std::string& out, const Vec3& v) {
    format_coord(out, v.x);
    out += ' ';
    format_coord(out, v.y);
    out += ' ';
    format_coord(out, v.z);
}

}  // namespace io_detail

// Parse a mesh from text in the declared format and run ingest normalization.
inline ParseResult parse_mesh(std::string_view text, MeshFormat format) {
    Mesh mesh;
    switch (format) {
        case MeshFormat::obj: mesh = io_detail::parse_obj(text); break;
        case MeshFormat::off: mesh = io_detail::parse_off(text); break;
        case MeshFormat::ply: mesh = io_detail::parse_ply(text); break;
    }
    if (mesh.faces.empty()) throw parse_error("mesh has no faces", 0);
    IngestStats stats = normalize_mesh(mesh);
    return {std::move(mesh), stats};
}

inline FaceRole coloring_role(const DiagnosticColoring* coloring, int f) {
    if (!coloring) return FaceRole::unfolded;
    auto it = coloring->roles.find(f);
    return it == coloring->roles.end() ? FaceRole::unfolded : it->second;
}

// Serialize with 17 significant digits so doubles survive the round trip.
inline std::string write_mesh(const Mesh& mesh, MeshFormat format,
                              const DiagnosticColoring* coloring = nullptr) {
    if (coloring)
        for (const auto& [f, role] : coloring->roles)
            if (f < 0 || f >= mesh.face_count())
                throw geometry_error("coloring references unknown face " + std::to_string(f));

    std::string out;
    out.reserve(mesh.vertices.size() * 48 + mesh.faces.size() * 24);
    switch (format) {
        case MeshFormat::obj: {
            if (coloring) out += "mtllib foldmend_diagnostics.mtl\n";
            for (const Vec3& v : mesh.vertices) {
                out += "v ";
                io_detail::append_vec(out, v);
                out += '\n';
            }
            const char* current = nullptr;
            for (int f = 0; f < mesh.face_count(); ++f) {
                if (coloring) {
                    const char* name = role_name(coloring_role(coloring, f));
                    if (current != name) {
                        out += "usemtl ";
                        out += name;
                        out += '\n';
                        current = name;
                    }
                }
                const Face& face = mesh.faces[f];
                out += "f " + std::to_string(face[0] + 1) + ' ' + std::to_string(face[1] + 1) +
                       ' ' + std::to_string(face[2] + 1) + '\n';
            }
            break;
        }
        case MeshFormat::off: {
            out += "OFF\n";
            out += std::to_string(mesh.vertices.size()) + ' ' + std::to_string(mesh.faces.size()) +
                   " 0\n";
            for (const Vec3& v : mesh.vertices) {
                io_detail::append_vec(out, v);
                out += '\n';
            }
            for (const Face& face : mesh.faces)
                out += "3 " + std::to_string(face[0]) + ' ' + std::to_string(face[1]) + ' ' +
                       std::to_string(face[2]) + '\n';
            break;
        }
        case MeshFormat::ply: {
            out += "ply\nformat ascii 1.0\n";
            out += "element vertex " + std::to_string(mesh.vertices.size()) + '\n';
            out += "property double x\nproperty double y\nproperty double z\n";
            out += "element face " + std::to_string(mesh.faces.size()) + '\n';
            out += "property list uchar int vertex_indices\n";
            if (coloring)
                out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
            out += "end_header\n";
            for (const Vec3& v : mesh.vertices) {
                io_detail::append_vec(out, v);
                out += '\n';
            }
            for (int f = 0; f < mesh.face_count(); ++f) {
                const Face& face = mesh.faces[f];
                out += "3 " + std::to_string(face[0]) + ' ' + std::to_string(face[1]) + ' ' +
                       std::to_string(face[2]);
                if (coloring) {
                    auto rgb = role_color(coloring_role(coloring, f));
                    out += ' ' + std::to_string(rgb[0]) + ' ' + std::to_string(rgb[1]) + ' ' +
                           std::to_string(rgb[2]);
                }
                out += '\n';
            }
            break;
        }
    }
    return out;
}

// Material library matching the diagnostic role palette, for colored OBJ.
inline std::string write_diagnostic_mtl() {
    std::string out;
    for (FaceRole role : {FaceRole::unfolded, FaceRole::intersecting, FaceRole::inward,
                          FaceRole::protruding, FaceRole::reconstructed, FaceRole::filled}) {
        auto rgb = role_color(role);
        char buf[96];
        std::snprintf(buf, sizeof(buf), "newmtl %s\nKd %.3f %.3f %.3f\n", role_name(role),
                      rgb[0] / 255.0, rgb[1] / 255.0, rgb[2] / 255.0);
        out += buf;
    }
    return out;
}

inline MeshFormat format_from_path(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    for (char& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".obj") return MeshFormat::obj;
    if (ext == ".off") return MeshFormat::off;
    if (ext == ".ply") return MeshFormat::ply;
    throw geometry_error("unsupported mesh extension '" + ext + "'");
}

inline ParseResult load_mesh(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw geometry_error("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_mesh(buffer.str(), format_from_path(path));
}

inline void save_mesh(const std::filesystem::path& path, const Mesh& mesh,
                      const DiagnosticColoring* coloring = nullptr) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw geometry_error("cannot write " + path.string());
    out << write_mesh(mesh, format_from_path(path), coloring);
    if (coloring && format_from_path(path) == MeshFormat::obj) {
        std::ofstream mtl(path.parent_path() / "foldmend_diagnostics.mtl", std::ios::binary);
        mtl << write_diagnostic_mtl();
    }
}

}  // namespace foldmend
