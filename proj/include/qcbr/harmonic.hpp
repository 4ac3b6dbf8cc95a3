#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qcbr/errors.hpp"
#include "qcbr/mesh.hpp"
#include "qcbr/solver.hpp"

namespace qcbr
{

/// Per undirected edge k_uv = cot(alpha) + cot(beta) over the angles opposite
/// the edge; boundary edges carry the single available term.
class CotangentWeights
{
public:
    CotangentWeights(std::vector<Edge> edges, std::vector<double> weights)
        : edges_(std::move(edges)), weights_(std::move(weights))
    {
    }

    [[nodiscard]] double weight(int u, int v) const
    {
        const Edge e(u, v);
        auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
        if (it == edges_.end() || *it != e) {
            throw ValidationError("no edge (" + std::to_string(u) + "," + std::to_string(v) + ")");
        }
        return weights_[static_cast<std::size_t>(it - edges_.begin())];
    }
    [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
    [[nodiscard]] const std::vector<double>& weights() const { return weights_; }

private:
    std::vector<Edge> edges_;
    std::vector<double> weights_;
};

inline CotangentWeights cot_weights(const TriMesh& mesh)
{
    std::map<Edge, double> acc;
    for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
        const auto& t = mesh.faces()[f];
        for (int c = 0; c < 3; ++c) {
            const int w = t[c], u = t[(c + 1) % 3], v = t[(c + 2) % 3];
            const Point3 eu = mesh.vertex(u) - mesh.vertex(w);
            const Point3 ev = mesh.vertex(v) - mesh.vertex(w);
            if (eu.squaredNorm() == 0.0 || ev.squaredNorm() == 0.0) {
                throw DegeneracyError("zero-length edge in face " + std::to_string(f));
            }
            const double cross = eu.cross(ev).norm();
            if (cross == 0.0) throw DegeneracyError("face " + std::to_string(f) + " has zero area");
            acc[Edge(u, v)] += eu.dot(ev) / cross;
        }
    }
    std::vector<Edge> edges;
    std::vector<double> weights;
    edges.reserve(acc.size());
    weights.reserve(acc.size());
    for (const auto& [e, k] : acc) {
        edges.push_back(e);
        weights.push_back(k);
    }
    return {std::move(edges), std::move(weights)};
}

/**
 * Cotangent Laplacian in stiffness normalization: L_uv = -k_uv/2 for an
 * edge, L_uu = sum_v k_uv/2. Scaling by 1/2 makes it equal to the P1
 * Dirichlet-energy matrix, i.e. the Beltrami solver's matrix at mu = 0.
 */
inline SparseMatrix cotangent_laplacian(const TriMesh& mesh, const CotangentWeights& w)
{
    std::vector<Triplet> trip;
    trip.reserve(w.edges().size() * 4);
    for (std::size_t i = 0; i < w.edges().size(); ++i) {
        const auto& e = w.edges()[i];
        const double k = 0.5 * w.weights()[i];
        trip.emplace_back(e.u, e.v, -k);
        trip.emplace_back(e.v, e.u, -k);
        trip.emplace_back(e.u, e.u, k);
        trip.emplace_back(e.v, e.v, k);
    }
    const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
    SparseMatrix l(n, n);
    l.setFromTriplets(trip.begin(), trip.end());
    return l;
}

inline SparseMatrix cotangent_laplacian(const TriMesh& mesh) { return cotangent_laplacian(mesh, cot_weights(mesh)); }

/// Unit-square domain. `corners` are four boundary vertices in boundary-loop
/// order mapped to (0,0), (1,0), (1,1), (0,1) respectively.
struct UnitSquare {
    std::array<int, 4> corners;
};

/// Plane-triangle domain for closed genus-0 meshes: `cut_face` is removed
/// and its vertices pinned to `targets` (counter-clockwise).
struct PlaneTriangle {
    int cut_face = 0;
    std::array<Point2, 3> targets{Point2(0.0, 0.0), Point2(1.0, 0.0), Point2(0.5, std::sqrt(3.0) / 2.0)};
};

using ParamDomain = std::variant<UnitSquare, PlaneTriangle>;

/// Which point of the unit square each corner slot is pinned to.
inline const std::array<Point2, 4>& square_corner_points()
{
    static const std::array<Point2, 4> pts{Point2(0, 0), Point2(1, 0), Point2(1, 1), Point2(0, 1)};
    return pts;
}

namespace detail
{

inline std::vector<double> cumulative_chord(const TriMesh& mesh, const std::vector<int>& loop)
{
    std::vector<double> s(loop.size() + 1, 0.0);
    for (std::size_t i = 0; i < loop.size(); ++i) {
        const int a = loop[i], b = loop[(i + 1) % loop.size()];
        s[i + 1] = s[i] + (mesh.vertex(b) - mesh.vertex(a)).norm();
    }
    return s;
}

/// Position of each corner within `loop`; throws unless all four are on the
/// loop, distinct, and in cyclic loop order.
inline std::array<std::size_t, 4> corner_positions(const std::vector<int>& loop, const std::array<int, 4>& corners)
{
    std::array<std::size_t, 4> pos{};
    for (int k = 0; k < 4; ++k) {
        auto it = std::find(loop.begin(), loop.end(), corners[k]);
        if (it == loop.end()) {
            throw ValidationError("anchor vertex " + std::to_string(corners[k]) + " is not on the boundary");
        }
        pos[k] = static_cast<std::size_t>(it - loop.begin());
    }
    const std::size_t n = loop.size();
    std::size_t prev = 0;
    for (int k = 1; k < 4; ++k) {
        const std::size_t d = (pos[k] + n - pos[0]) % n;
        if (d <= prev) throw ValidationError("anchors must be distinct and in boundary-loop order");
        prev = d;
    }
    return pos;
}

}  // namespace detail

/// Four corners splitting the boundary loop into chord-length quarters,
/// starting at the loop's lowest-index vertex.
inline std::array<int, 4> default_square_corners(const TriMesh& mesh)
{
    const auto loop = boundary_loop(mesh);
    if (loop.size() < 4) throw TopologyError("boundary loop has fewer than 4 vertices");
    const auto s = detail::cumulative_chord(mesh, loop);
    const double total = s.back();
    std::array<int, 4> corners{loop[0], 0, 0, 0};
    std::size_t last = 0;
    for (int k = 1; k < 4; ++k) {
        const double target = total * k / 4.0;
        std::size_t best = last + 1;
        for (std::size_t i = last + 1; i + (4 - k) <= loop.size(); ++i) {
            if (std::abs(s[i] - target) < std::abs(s[best] - target)) best = i;
        }
        corners[k] = loop[best];
        last = best;
    }
    return corners;
}

/**
 * Boundary images for the unit square: corners pinned, the vertices between
 * consecutive corners spaced by chord length along the corresponding side.
 * Returns (vertex, position) pairs in loop order starting at corners[0].
 */
inline std::vector<std::pair<int, Point2>> square_boundary_positions(const TriMesh& mesh,
                                                                     const std::array<int, 4>& corners)
{
    const auto loop = boundary_loop(mesh);
    const auto pos = detail::corner_positions(loop, corners);
    const auto& cp = square_corner_points();
    const std::size_t n = loop.size();
    std::vector<std::pair<int, Point2>> out;
    out.reserve(n);
    for (int k = 0; k < 4; ++k) {
        const std::size_t from = pos[k], to = pos[(k + 1) % 4];
        const std::size_t len = (to + n - from) % n;
        std::vector<double> s(len + 1, 0.0);
        for (std::size_t i = 0; i < len; ++i) {
            const int a = loop[(from + i) % n], b = loop[(from + i + 1) % n];
            s[i + 1] = s[i] + (mesh.vertex(b) - mesh.vertex(a)).norm();
        }
        out.emplace_back(loop[from], cp[k]);
        for (std::size_t i = 1; i < len; ++i) {
            const double t = s[i] / s[len];
            out.emplace_back(loop[(from + i) % n], (1.0 - t) * cp[k] + t * cp[(k + 1) % 4]);
        }
    }
    return out;
}

/**
 * Harmonic extension: solve sum_v k_uv (phi(u) - phi(v)) = 0 at every vertex
 * not in `fixed`, with the fixed vertices eliminated into the right-hand
 * side. Returns one planar image per vertex.
 */
inline std::vector<Point2> harmonic_extension(const TriMesh& mesh, const std::vector<std::pair<int, Point2>>& fixed,
                                              const SolverConfig& config = {}, SolveStats* stats = nullptr)
{
    const auto nv = mesh.num_vertices();
    if (fixed.empty()) throw SolverError("singular harmonic system: no constrained vertices");
    std::vector<int> slot(nv, -1);
    std::vector<Point2> phi(nv, Point2::Zero());
    std::vector<char> is_fixed(nv, 0);
    for (const auto& [v, p] : fixed) {
        is_fixed[v] = 1;
        phi[v] = p;
    }
    int nfree = 0;
    for (std::size_t v = 0; v < nv; ++v) {
        if (!is_fixed[v]) slot[v] = nfree++;
    }
    if (nfree == 0) return phi;

    const SparseMatrix l = cotangent_laplacian(mesh);
    std::vector<Triplet> trip;
    Eigen::MatrixX2d rhs = Eigen::MatrixX2d::Zero(nfree, 2);
    for (int k = 0; k < l.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(l, k); it; ++it) {
            const auto r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
            if (slot[r] < 0) continue;
            if (slot[c] >= 0) {
                trip.emplace_back(slot[r], slot[c], it.value());
            } else {
                rhs.row(slot[r]) -= it.value() * phi[c].transpose();
            }
        }
    }
    SparseMatrix a(nfree, nfree);
    a.setFromTriplets(trip.begin(), trip.end());
    const long cap = 10 * static_cast<long>(nv);
    SolveStats sx, sy;
    const Eigen::VectorXd x = solve_spd(a, rhs.col(0), config, cap, &sx);
    const Eigen::VectorXd y = solve_spd(a, rhs.col(1), config, cap, &sy);
    if (stats) {
        stats->iterations = std::max(sx.iterations, sy.iterations);
        stats->relative_residual = std::max(sx.relative_residual, sy.relative_residual);
    }
    for (std::size_t v = 0; v < nv; ++v) {
        if (slot[v] >= 0) phi[v] = Point2(x[slot[v]], y[slot[v]]);
    }
    return phi;
}

/// Harmonic map of a disk mesh onto [0,1]^2 with the given corners.
inline PLMap harmonic_to_square(const TriMesh& mesh, const std::array<int, 4>& corners, const SolverConfig& config = {})
{
    const auto topo = classify_topology(mesh);
    if (topo.kind != Topology::Kind::Disk) {
        throw TopologyError(std::string("square parameterization needs a disk mesh, got ") + to_string(topo.kind) +
                            " (chi=" + std::to_string(topo.euler) + ")");
    }
    const auto fixed = square_boundary_positions(mesh, corners);
    const auto phi = harmonic_extension(mesh, fixed, config);
    return PLMap::planar(mesh, phi);
}

inline PLMap harmonic_to_square(const TriMesh& mesh, const SolverConfig& config = {})
{
    return harmonic_to_square(mesh, default_square_corners(mesh), config);
}

/// Vertices of the cut face in the order the cut mesh's boundary loop visits
/// them; targets[i] is assigned to element i.
inline std::array<int, 3> cut_face_anchor_order(const TriMesh& mesh, int cut_face)
{
    const auto& t = mesh.faces()[static_cast<std::size_t>(cut_face)];
    return {t[0], t[2], t[1]};
}

/**
 * Harmonic map of a closed genus-0 mesh onto a plane triangle. The cut face
 * is removed from the output connectivity (later faces shift down by one);
 * its vertices are pinned to the targets in the order given by
 * `cut_face_anchor_order`, so counter-clockwise targets give a positively
 * oriented result.
 */
inline PLMap harmonic_to_triangle(const TriMesh& mesh, const PlaneTriangle& domain, const SolverConfig& config = {})
{
    if (domain.cut_face < 0 || static_cast<std::size_t>(domain.cut_face) >= mesh.num_faces()) {
        throw ValidationError("cut face index " + std::to_string(domain.cut_face) + " out of range");
    }
    const auto topo = classify_topology(mesh);
    if (topo.kind != Topology::Kind::ClosedGenus0) {
        throw TopologyError(std::string("triangle parameterization needs a closed genus-0 mesh, got ") +
                            to_string(topo.kind) + " (chi=" + std::to_string(topo.euler) + ")");
    }
    const auto& p = domain.targets;
    if (std::abs(signed_area(p[0], p[1], p[2])) <= 1e-14) throw ValidationError("triangle targets are collinear");
    TriMesh cut = remove_face(mesh, static_cast<std::size_t>(domain.cut_face));
    const auto order = cut_face_anchor_order(mesh, domain.cut_face);
    std::vector<std::pair<int, Point2>> fixed{{order[0], p[0]}, {order[1], p[1]}, {order[2], p[2]}};
    const auto phi = harmonic_extension(cut, fixed, config);
    return PLMap::planar(std::move(cut), phi);
}

/// Dispatch on the domain kind.
inline PLMap parameterize(const TriMesh& mesh, const ParamDomain& domain, const SolverConfig& config = {})
{
    if (const auto* sq = std::get_if<UnitSquare>(&domain)) return harmonic_to_square(mesh, sq->corners, config);
    return harmonic_to_triangle(mesh, std::get<PlaneTriangle>(domain), config);
}

/// Square domain with default corners for disks, default triangle otherwise.
inline ParamDomain default_domain(const TriMesh& mesh)
{
    const auto topo = classify_topology(mesh);
    if (topo.kind == Topology::Kind::Disk) return UnitSquare{default_square_corners(mesh)};
    if (topo.kind == Topology::Kind::ClosedGenus0) return PlaneTriangle{};
    throw TopologyError("unsupported topology: chi=" + std::to_string(topo.euler) + ", " +
                        std::to_string(topo.boundary_loops) + " boundary loops");
}

}  // namespace qcbr
