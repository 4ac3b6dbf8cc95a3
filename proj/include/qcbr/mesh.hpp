#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

#include "qcbr/errors.hpp"

namespace qcbr
{

using Point2 = Eigen::Vector2d;
using Point3 = Eigen::Vector3d;
using Face = std::array<int, 3>;

enum class Dimension { Planar, Spatial };

/// Undirected edge, stored with the smaller index first.
struct Edge {
    int u;
    int v;
    Edge(int a, int b) : u(std::min(a, b)), v(std::max(a, b)) {}
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

/**
 * Triangle mesh shared by 3D surfaces and planar domains.
 *
 * Construction validates the structural invariants: indices in range, no
 * repeated vertex within a face, no isolated vertex, and every directed
 * edge used by at most one face (consistent orientation, at most two faces
 * per undirected edge). Planar meshes keep z = 0 and follow the
 * counter-clockwise convention, so a positively oriented face has positive
 * signed area.
 *
 * Zero-area faces are structurally valid; call `require_nondegenerate` where
 * an operation divides by face area.
 */
class TriMesh
{
public:
    TriMesh(std::vector<Point3> vertices, std::vector<Face> faces,
            Dimension dim = Dimension::Spatial)
        : vertices_(std::move(vertices)), faces_(std::move(faces)), dim_(dim)
    {
        validate();
        if (dim_ == Dimension::Planar) {
            for (auto& p : vertices_) p.z() = 0.0;
        }
    }

    static TriMesh planar(std::span<const Point2> pts, std::vector<Face> faces)
    {
        std::vector<Point3> v;
        v.reserve(pts.size());
        for (const auto& p : pts) v.emplace_back(p.x(), p.y(), 0.0);
        return TriMesh(std::move(v), std::move(faces), Dimension::Planar);
    }

    [[nodiscard]] const std::vector<Point3>& vertices() const { return vertices_; }
    [[nodiscard]] const std::vector<Face>& faces() const { return faces_; }
    [[nodiscard]] Dimension dimension() const { return dim_; }
    [[nodiscard]] bool is_planar() const { return dim_ == Dimension::Planar; }
    [[nodiscard]] std::size_t num_vertices() const { return vertices_.size(); }
    [[nodiscard]] std::size_t num_faces() const { return faces_.size(); }
    [[nodiscard]] const Point3& vertex(std::size_t i) const { return vertices_[i]; }
    [[nodiscard]] Point2 point2(std::size_t i) const { return vertices_[i].head<2>(); }

    friend bool operator==(const TriMesh& a, const TriMesh& b)
    {
        return a.dim_ == b.dim_ && a.faces_ == b.faces_ && a.vertices_ == b.vertices_;
    }

private:
    void validate() const
    {
        if (faces_.empty()) throw ValidationError("mesh has no faces");
        const auto n = static_cast<int>(vertices_.size());
        std::vector<char> used(vertices_.size(), 0);
        std::vector<std::pair<int, int>> directed;
        directed.reserve(faces_.size() * 3);
        for (std::size_t f = 0; f < faces_.size(); ++f) {
            const auto& t = faces_[f];
            for (int c = 0; c < 3; ++c) {
                if (t[c] < 0 || t[c] >= n) {
                    throw ValidationError("face " + std::to_string(f) +
                                          " references vertex " + std::to_string(t[c]) +
                                          " out of range");
                }
                used[t[c]] = 1;
                directed.emplace_back(t[c], t[(c + 1) % 3]);
            }
            if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
                throw ValidationError("face " + std::to_string(f) + " repeats a vertex");
            }
        }
        for (std::size_t i = 0; i < used.size(); ++i) {
            if (!used[i]) throw ValidationError("isolated vertex " + std::to_string(i));
        }
        std::sort(directed.begin(), directed.end());
        auto dup = std::adjacent_find(directed.begin(), directed.end());
        if (dup != directed.end()) {
            throw TopologyError("directed edge (" + std::to_string(dup->first) + "," +
                                std::to_string(dup->second) +
                                ") used twice: non-manifold or inconsistently oriented");
        }
    }

    std::vector<Point3> vertices_;
    std::vector<Face> faces_;
    Dimension dim_;
};

/// Piecewise-linear map given by one image point per source vertex.
class PLMap
{
public:
    PLMap(TriMesh source, std::vector<Point3> images, Dimension dim)
        : source_(std::move(source)), images_(std::move(images)), dim_(dim)
    {
        if (images_.size() != source_.num_vertices()) {
            throw ValidationError("map has " + std::to_string(images_.size()) +
                                  " images for " + std::to_string(source_.num_vertices()) +
                                  " source vertices");
        }
        if (dim_ == Dimension::Planar) {
            for (auto& p : images_) p.z() = 0.0;
        }
    }

    static PLMap planar(TriMesh source, std::span<const Point2> images)
    {
        std::vector<Point3> v;
        v.reserve(images.size());
        for (const auto& p : images) v.emplace_back(p.x(), p.y(), 0.0);
        return PLMap(std::move(source), std::move(v), Dimension::Planar);
    }

    [[nodiscard]] const TriMesh& source() const { return source_; }
    [[nodiscard]] const std::vector<Point3>& images() const { return images_; }
    [[nodiscard]] Dimension dimension() const { return dim_; }
    [[nodiscard]] bool is_planar() const { return dim_ == Dimension::Planar; }
    [[nodiscard]] Point2 image2(std::size_t i) const { return images_[i].head<2>(); }

    [[nodiscard]] std::vector<Point2> planar_images() const
    {
        std::vector<Point2> out;
        out.reserve(images_.size());
        for (const auto& p : images_) out.push_back(p.head<2>());
        return out;
    }

    /// The image triangulation: images as vertices, source connectivity.
    [[nodiscard]] TriMesh image_mesh() const
    {
        return TriMesh(images_, source_.faces(), dim_);
    }

private:
    TriMesh source_;
    std::vector<Point3> images_;
    Dimension dim_;
};

struct Topology {
    enum class Kind { Disk, ClosedGenus0, Other };
    Kind kind;
    int euler;
    int boundary_loops;
};

inline const char* to_string(Topology::Kind k)
{
    switch (k) {
        case Topology::Kind::Disk: return "disk";
        case Topology::Kind::ClosedGenus0: return "closed-genus0";
        case Topology::Kind::Other: return "other";
    }
    return "?";
}

/// Undirected edges with the number of incident faces, sorted.
inline std::vector<std::pair<Edge, int>> edge_incidence(const TriMesh& mesh)
{
    std::map<Edge, int> counts;
    for (const auto& t : mesh.faces()) {
        for (int c = 0; c < 3; ++c) ++counts[Edge(t[c], t[(c + 1) % 3])];
    }
    return {counts.begin(), counts.end()};
}

/// Boundary loops in face orientation (counter-clockwise for planar CCW
/// meshes), each starting at its lowest vertex index; loops sorted by that
/// start vertex.
inline std::vector<std::vector<int>> boundary_loops(const TriMesh& mesh)
{
    std::map<std::pair<int, int>, int> directed;
    for (const auto& t : mesh.faces()) {
        for (int c = 0; c < 3; ++c) directed[{t[c], t[(c + 1) % 3]}] = 1;
    }
    std::map<int, int> next;
    for (const auto& [e, _] : directed) {
        if (!directed.contains({e.second, e.first})) {
            if (next.contains(e.first)) {
                throw TopologyError("vertex " + std::to_string(e.first) +
                                    " has two outgoing boundary edges (non-manifold vertex)");
            }
            next[e.first] = e.second;
        }
    }
    std::vector<std::vector<int>> loops;
    std::map<int, bool> visited;
    for (const auto& [start, _] : next) {
        if (visited[start]) continue;
        std::vector<int> loop;
        int v = start;
        do {
            if (visited[v]) throw TopologyError("malformed boundary cycle");
            visited[v] = true;
            loop.push_back(v);
            auto it = next.find(v);
            if (it == next.end()) throw TopologyError("open boundary chain");
            v = it->second;
        } while (v != start);
        loops.push_back(std::move(loop));
    }
    return loops;
}

inline Topology classify_topology(const TriMesh& mesh)
{
    const auto edges = edge_incidence(mesh);
    for (const auto& [e, count] : edges) {
        if (count > 2) {
            throw TopologyError("non-manifold edge (" + std::to_string(e.u) + "," +
                                std::to_string(e.v) + ") shared by " +
                                std::to_string(count) + " faces");
        }
    }
    const int chi = static_cast<int>(mesh.num_vertices()) - static_cast<int>(edges.size()) +
                    static_cast<int>(mesh.num_faces());
    const int loops = static_cast<int>(boundary_loops(mesh).size());
    Topology::Kind kind = Topology::Kind::Other;
    if (chi == 1 && loops == 1) kind = Topology::Kind::Disk;
    if (chi == 2 && loops == 0) kind = Topology::Kind::ClosedGenus0;
    return {kind, chi, loops};
}

/// The single boundary cycle of a disk mesh.
inline std::vector<int> boundary_loop(const TriMesh& mesh)
{
    auto loops = boundary_loops(mesh);
    if (loops.empty()) throw TopologyError("mesh is closed: empty boundary");
    if (loops.size() > 1) {
        throw TopologyError("mesh has " + std::to_string(loops.size()) + " boundary loops");
    }
    return std::move(loops.front());
}

inline double signed_area(const Point2& a, const Point2& b, const Point2& c)
{
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

/// Per-face signed area of the planar image triangles.
inline std::vector<double> signed_areas(const PLMap& map)
{
    const auto& faces = map.source().faces();
    std::vector<double> out(faces.size());
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const auto& t = faces[f];
        out[f] = signed_area(map.image2(t[0]), map.image2(t[1]), map.image2(t[2]));
    }
    return out;
}

/// Signed areas of a planar mesh's own faces.
inline std::vector<double> signed_areas(const TriMesh& mesh)
{
    std::vector<double> out(mesh.num_faces());
    for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
        const auto& t = mesh.faces()[f];
        out[f] = signed_area(mesh.point2(t[0]), mesh.point2(t[1]), mesh.point2(t[2]));
    }
    return out;
}

inline bool is_orientation_preserving(const PLMap& map)
{
    const auto a = signed_areas(map);
    return std::all_of(a.begin(), a.end(), [](double x) { return x > 0.0; });
}

inline std::size_t count_folds(const PLMap& map)
{
    const auto a = signed_areas(map);
    return static_cast<std::size_t>(std::count_if(a.begin(), a.end(), [](double x) { return x <= 0.0; }));
}

/// Unsigned area of a face in 3D.
inline double face_area(const TriMesh& mesh, std::size_t f)
{
    const auto& t = mesh.faces()[f];
    const Point3 e1 = mesh.vertex(t[1]) - mesh.vertex(t[0]);
    const Point3 e2 = mesh.vertex(t[2]) - mesh.vertex(t[0]);
    return 0.5 * e1.cross(e2).norm();
}

/// Throws DegeneracyError naming the first face whose area is zero relative
/// to the mesh's bounding-box scale.
inline void require_nondegenerate(const TriMesh& mesh)
{
    Point3 lo = mesh.vertex(0), hi = mesh.vertex(0);
    for (const auto& p : mesh.vertices()) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    const double scale = (hi - lo).squaredNorm();
    for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
        if (face_area(mesh, f) <= 1e-14 * scale) {
            throw DegeneracyError("face " + std::to_string(f) + " has zero area");
        }
    }
}

/// Copy of `mesh` with face `f` removed. Faces after `f` shift down by one.
inline TriMesh remove_face(const TriMesh& mesh, std::size_t f)
{
    if (f >= mesh.num_faces()) {
        throw ValidationError("face index " + std::to_string(f) + " out of range");
    }
    auto faces = mesh.faces();
    faces.erase(faces.begin() + static_cast<std::ptrdiff_t>(f));
    return TriMesh(mesh.vertices(), std::move(faces), mesh.dimension());
}

/// Sub-mesh extracted from a larger mesh; `vertex_map[i]` is the parent
/// index of local vertex i, `face_map` likewise for faces.
struct SubMesh {
    TriMesh mesh;
    std::vector<int> vertex_map;
    std::vector<int> face_map;
};

/// Edge-connected components, ordered by their lowest parent face index.
inline std::vector<SubMesh> connected_components(const TriMesh& mesh)
{
    const auto nv = mesh.num_vertices();
    std::vector<int> parent(nv);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& t : mesh.faces()) {
        for (int c = 1; c < 3; ++c) {
            const int a = find(t[0]), b = find(t[c]);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
    }
    std::map<int, std::size_t> component_of_root;
    std::vector<std::vector<int>> comp_faces;
    for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
        const int r = find(mesh.faces()[f][0]);
        auto [it, inserted] = component_of_root.try_emplace(r, comp_faces.size());
        if (inserted) comp_faces.emplace_back();
        comp_faces[it->second].push_back(static_cast<int>(f));
    }
    std::vector<SubMesh> out;
    for (const auto& cf : comp_faces) {
        std::vector<int> local(nv, -1), vmap;
        std::vector<Face> faces;
        for (int f : cf) {
            Face t{};
            for (int c = 0; c < 3; ++c) {
                const int v = mesh.faces()[f][c];
                if (local[v] < 0) {
                    local[v] = static_cast<int>(vmap.size());
                    vmap.push_back(v);
                }
                t[c] = local[v];
            }
            faces.push_back(t);
        }
        std::vector<Point3> verts;
        for (int v : vmap) verts.push_back(mesh.vertex(v));
        out.push_back({TriMesh(std::move(verts), std::move(faces), mesh.dimension()), vmap, cf});
    }
    return out;
}

/**
 * Regular planar grid of the unit square with `nx` x `ny` vertices.
 * Vertex (i, j) has index j*nx + i and position (i/(nx-1), j/(ny-1)); each
 * cell is split along its lower-left to upper-right diagonal, both faces
 * counter-clockwise.
 */
inline TriMesh unit_square_grid(int nx, int ny)
{
    if (nx < 2 || ny < 2) throw ValidationError("grid needs at least 2x2 vertices");
    std::vector<Point3> v;
    v.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            v.emplace_back(static_cast<double>(i) / (nx - 1), static_cast<double>(j) / (ny - 1), 0.0);
        }
    }
    std::vector<Face> f;
    f.reserve(2 * static_cast<std::size_t>(nx - 1) * (ny - 1));
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            const int v00 = j * nx + i, v10 = v00 + 1, v01 = v00 + nx, v11 = v01 + 1;
            f.push_back({v00, v10, v11});
            f.push_back({v00, v11, v01});
        }
    }
    return TriMesh(std::move(v), std::move(f), Dimension::Planar);
}

}  // namespace qcbr
