#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qcbr/errors.hpp"
#include "qcbr/mesh.hpp"

namespace qcbr
{

/// Mesh plus optional per-vertex texture coordinates.
struct ObjData {
    TriMesh mesh;
    std::optional<std::vector<Point2>> uv;
};

namespace detail
{

inline std::vector<std::string_view> split_ws(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

inline double parse_double(std::string_view s, std::size_t line_no)
{
    double value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw FormatError("line " + std::to_string(line_no) + ": bad number '" + std::string(s) + "'");
    }
    return value;
}

inline int parse_index(std::string_view s, std::size_t line_no)
{
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || value < 1) {
        throw FormatError("line " + std::to_string(line_no) + ": bad index '" + std::string(s) + "'");
    }
    return value - 1;
}

}  // namespace detail

/**
 * Parse the OBJ subset: `v x y z`, `vt u v`, `f a b c` or `f a/a' b/b' c/c'`
 * with 1-based indices, `#` comments and blank lines. Any other record,
 * non-triangular faces, or a vertex referenced with two different `vt`
 * indices is a FormatError. A mesh whose z coordinates are all zero is
 * tagged planar. Zero-area faces are rejected.
 */
inline ObjData read_obj(std::istream& in)
{
    std::vector<Point3> verts;
    std::vector<Point2> texcoords;
    std::vector<Face> faces;
    std::vector<int> vt_of_vertex;
    bool faces_have_vt = false;
    bool faces_plain = false;

    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        const std::string_view body = std::string_view(line).substr(0, hash);
        const auto tok = detail::split_ws(body);
        if (tok.empty()) continue;
        const auto& kw = tok[0];
        if (kw == "v") {
            if (tok.size() != 4) throw FormatError("line " + std::to_string(line_no) + ": 'v' needs 3 coordinates");
            verts.emplace_back(detail::parse_double(tok[1], line_no), detail::parse_double(tok[2], line_no),
                               detail::parse_double(tok[3], line_no));
        } else if (kw == "vt") {
            if (tok.size() != 3) throw FormatError("line " + std::to_string(line_no) + ": 'vt' needs 2 coordinates");
            texcoords.emplace_back(detail::parse_double(tok[1], line_no), detail::parse_double(tok[2], line_no));
        } else if (kw == "f") {
            if (tok.size() != 4) {
                throw FormatError("line " + std::to_string(line_no) + ": unsupported face with " +
                                  std::to_string(tok.size() - 1) + " vertices (triangles only)");
            }
            Face t{};
            for (int c = 0; c < 3; ++c) {
                const auto ref = tok[c + 1];
                const auto slash = ref.find('/');
                if (slash == std::string_view::npos) {
                    faces_plain = true;
                    t[c] = detail::parse_index(ref, line_no);
                } else {
                    faces_have_vt = true;
                    t[c] = detail::parse_index(ref.substr(0, slash), line_no);
                    const int vt = detail::parse_index(ref.substr(slash + 1), line_no);
                    if (static_cast<std::size_t>(t[c]) >= vt_of_vertex.size()) {
                        vt_of_vertex.resize(t[c] + 1, -1);
                    }
                    if (vt_of_vertex[t[c]] >= 0 && vt_of_vertex[t[c]] != vt) {
                        throw FormatError("line " + std::to_string(line_no) + ": vertex " +
                                          std::to_string(t[c] + 1) + " paired with two vt indices");
                    }
                    vt_of_vertex[t[c]] = vt;
                }
                if (static_cast<std::size_t>(t[c]) >= verts.size()) {
                    throw FormatError("line " + std::to_string(line_no) + ": vertex index " +
                                      std::to_string(t[c] + 1) + " not yet defined");
                }
            }
            faces.push_back(t);
        } else {
            throw FormatError("line " + std::to_string(line_no) + ": unsupported record '" + std::string(kw) + "'");
        }
    }
    if (faces_have_vt && faces_plain) throw FormatError("faces mix 'a' and 'a/a'' references");

    std::optional<std::vector<Point2>> uv;
    if (faces_have_vt) {
        std::vector<Point2> per_vertex(verts.size());
        vt_of_vertex.resize(verts.size(), -1);
        for (std::size_t v = 0; v < verts.size(); ++v) {
            const int vt = vt_of_vertex[v];
            if (vt < 0 || static_cast<std::size_t>(vt) >= texcoords.size()) {
                throw FormatError("vt index mismatch for vertex " + std::to_string(v + 1));
            }
            per_vertex[v] = texcoords[vt];
        }
        uv = std::move(per_vertex);
    } else if (!texcoords.empty()) {
        if (texcoords.size() != verts.size()) {
            throw FormatError("vt index mismatch: " + std::to_string(texcoords.size()) + " vt records for " +
                              std::to_string(verts.size()) + " vertices");
        }
        uv = texcoords;
    }

    const bool planar = !verts.empty() && std::all_of(verts.begin(), verts.end(), [](const Point3& p) { return p.z() == 0.0; });
    TriMesh mesh(std::move(verts), std::move(faces), planar ? Dimension::Planar : Dimension::Spatial);
    require_nondegenerate(mesh);
    return {std::move(mesh), std::move(uv)};
}

inline ObjData load_obj(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    return read_obj(in);
}

inline void write_obj(std::ostream& out, const TriMesh& mesh, const std::vector<Point2>* uv = nullptr)
{
    char buf[128];
    for (const auto& p : mesh.vertices()) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g %.17g\n", p.x(), p.y(), p.z());
        out << buf;
    }
    if (uv) {
        if (uv->size() != mesh.num_vertices()) throw ValidationError("uv count does not match vertex count");
        for (const auto& t : *uv) {
            std::snprintf(buf, sizeof buf, "vt %.17g %.17g\n", t.x(), t.y());
            out << buf;
        }
    }
    for (const auto& f : mesh.faces()) {
        if (uv) {
            out << "f " << f[0] + 1 << '/' << f[0] + 1 << ' ' << f[1] + 1 << '/' << f[1] + 1 << ' ' << f[2] + 1
                << '/' << f[2] + 1 << '\n';
        } else {
            out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
        }
    }
}

inline void save_obj(const std::string& path, const TriMesh& mesh, const std::vector<Point2>* uv = nullptr)
{
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write '" + path + "'");
    write_obj(out, mesh, uv);
    if (!out) throw FormatError("write failed for '" + path + "'");
}

}  // namespace qcbr
