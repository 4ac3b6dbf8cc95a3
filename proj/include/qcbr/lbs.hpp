#pragma once

#include <array>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "qcbr/beltrami.hpp"
#include "qcbr/errors.hpp"
#include "qcbr/harmonic.hpp"
#include "qcbr/locate.hpp"
#include "qcbr/mesh.hpp"
#include "qcbr/solver.hpp"

namespace qcbr
{

/// Coefficients of the symmetric 2x2 matrix [[a1, a2], [a2, a3]] relating
/// the differential of a map to its Beltrami coefficient on one face:
/// (d, -c) = M (a, b) and (-b, a) = M (c, d). det M = 1 for |mu| < 1.
struct AlphaCoeffs {
    double a1 = 1.0, a2 = 0.0, a3 = 1.0;
};

inline AlphaCoeffs alpha_from_mu(Complex mu)
{
    const double rho = mu.real(), tau = mu.imag();
    const double denom = 1.0 - rho * rho - tau * tau;
    return {((rho - 1.0) * (rho - 1.0) + tau * tau) / denom, -2.0 * tau / denom,
            (1.0 + 2.0 * rho + rho * rho + tau * tau) / denom};
}

inline std::vector<AlphaCoeffs> alpha_coeffs(const BeltramiField& mu)
{
    std::vector<AlphaCoeffs> out(mu.size());
    for (std::size_t f = 0; f < mu.size(); ++f) {
        if (!(std::abs(mu[f]) < 1.0)) {
            throw InadmissibleError("face " + std::to_string(f) + " has |mu| = " + std::to_string(std::abs(mu[f])) +
                                        " >= 1",
                                    static_cast<long>(f));
        }
        out[f] = alpha_from_mu(mu[f]);
    }
    return out;
}

/// Per-face P1 gradient weights: for face [vi, vj, vk] with x = g, y = h,
/// A_i = (h_j - h_k) / 2Area, B_i = (g_k - g_j) / 2Area (cyclically), so
/// that a_T = sum A_I s_I and b_T = sum B_I s_I. `area` is signed.
struct FaceOperator {
    std::array<double, 3> A{};
    std::array<double, 3> B{};
    double area = 0.0;
};

inline std::vector<FaceOperator> gradient_operator(const TriMesh& mesh)
{
    if (!mesh.is_planar()) throw ValidationError("gradient operator needs a planar mesh");
    std::vector<FaceOperator> ops(mesh.num_faces());
    for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
        const auto& t = mesh.faces()[f];
        const Point2 p[3] = {mesh.point2(t[0]), mesh.point2(t[1]), mesh.point2(t[2])};
        const double area = signed_area(p[0], p[1], p[2]);
        if (area == 0.0) throw DegeneracyError("domain face " + std::to_string(f) + " has zero area");
        FaceOperator& op = ops[f];
        op.area = area;
        for (int c = 0; c < 3; ++c) {
            const Point2& pj = p[(c + 1) % 3];
            const Point2& pk = p[(c + 2) % 3];
            op.A[c] = (pj.y() - pk.y()) / (2.0 * area);
            op.B[c] = (pk.x() - pj.x()) / (2.0 * area);
        }
    }
    return ops;
}

/**
 * Unconstrained Beltrami stiffness matrix. Row i, column q is
 * sum_{T in N_i} |Area(T)| (A_i (a1 A_q + a2 B_q) + B_i (a2 A_q + a3 B_q)),
 * the coefficient of s_q (or t_q) in the vertex-i equation. The same matrix
 * serves the x- and y-coordinate systems.
 */
inline SparseMatrix stiffness_matrix(const TriMesh& mesh, const std::vector<AlphaCoeffs>& alphas)
{
    if (alphas.size() != mesh.num_faces()) {
        throw ValidationError("alpha count " + std::to_string(alphas.size()) + " does not match face count " +
                              std::to_string(mesh.num_faces()));
    }
    const auto ops = gradient_operator(mesh);
    std::vector<Triplet> trip;
    trip.reserve(mesh.num_faces() * 9);
    for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
        const auto& t = mesh.faces()[f];
        const auto& op = ops[f];
        const auto& al = alphas[f];
        const double w = std::abs(op.area);
        for (int p = 0; p < 3; ++p) {
            for (int q = 0; q < 3; ++q) {
                const double v = op.A[p] * (al.a1 * op.A[q] + al.a2 * op.B[q]) +
                                 op.B[p] * (al.a2 * op.A[q] + al.a3 * op.B[q]);
                trip.emplace_back(t[p], t[q], w * v);
            }
        }
    }
    const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
    SparseMatrix k(n, n);
    k.setFromTriplets(trip.begin(), trip.end());
    return k;
}

/// Three pinned vertices (closed-surface triangle domain).
struct TriangleFixed {
    std::array<int, 3> vertices;
    std::array<Point2, 3> targets;
};

/// Axis-aligned rectangle [lo, hi] (unit square by default): corners fully
/// pinned, and along each side the normal coordinate pinned while the
/// tangential one stays free. Corners are in boundary-loop order mapped to
/// (lo.x, lo.y), (hi.x, lo.y), (hi.x, hi.y), (lo.x, hi.y).
struct SquareArcs {
    std::array<int, 4> corners;
    Point2 lo{0.0, 0.0};
    Point2 hi{1.0, 1.0};
};

/// Both coordinates prescribed on every listed vertex; must cover the whole
/// boundary loop.
struct DirichletFull {
    std::vector<std::pair<int, Point2>> targets;
};

using BoundaryConditions = std::variant<TriangleFixed, SquareArcs, DirichletFull>;

/// Per-coordinate pinned values (NaN where free).
struct CoordinateConstraints {
    std::vector<double> value;
    std::vector<char> fixed;
};

inline std::array<CoordinateConstraints, 2> constraints_from(const TriMesh& mesh, const BoundaryConditions& bc)
{
    const auto nv = mesh.num_vertices();
    std::array<CoordinateConstraints, 2> cc;
    for (auto& c : cc) {
        c.value.assign(nv, std::nan(""));
        c.fixed.assign(nv, 0);
    }
    auto pin = [&](int v, int coord, double value) {
        if (v < 0 || static_cast<std::size_t>(v) >= nv) {
            throw ValidationError("constrained vertex " + std::to_string(v) + " out of range");
        }
        cc[coord].value[v] = value;
        cc[coord].fixed[v] = 1;
    };
    std::visit(
        [&](const auto& b) {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, TriangleFixed>) {
                for (int i = 0; i < 3; ++i) {
                    pin(b.vertices[i], 0, b.targets[i].x());
                    pin(b.vertices[i], 1, b.targets[i].y());
                }
            } else if constexpr (std::is_same_v<T, SquareArcs>) {
                const auto loop = boundary_loop(mesh);
                const auto pos = detail::corner_positions(loop, b.corners);
                const std::size_t n = loop.size();
                const std::array<Point2, 4> cp{b.lo, Point2(b.hi.x(), b.lo.y()), b.hi, Point2(b.lo.x(), b.hi.y())};
                for (int k = 0; k < 4; ++k) {
                    pin(b.corners[k], 0, cp[k].x());
                    pin(b.corners[k], 1, cp[k].y());
                    const std::size_t len = (pos[(k + 1) % 4] + n - pos[k]) % n;
                    for (std::size_t i = 1; i < len; ++i) {
                        const int v = loop[(pos[k] + i) % n];
                        switch (k) {
                            case 0: pin(v, 1, b.lo.y()); break;
                            case 1: pin(v, 0, b.hi.x()); break;
                            case 2: pin(v, 1, b.hi.y()); break;
                            default: pin(v, 0, b.lo.x()); break;
                        }
                    }
                }
            } else {
                for (const auto& [v, p] : b.targets) {
                    pin(v, 0, p.x());
                    pin(v, 1, p.y());
                }
                for (const auto& loop : boundary_loops(mesh)) {
                    for (int v : loop) {
                        if (!cc[0].fixed[v]) {
                            throw ValidationError("Dirichlet data misses boundary vertex " + std::to_string(v));
                        }
                    }
                }
            }
        },
        bc);
    return cc;
}

/// One coordinate's reduced system: unknowns are the free vertices, in
/// ascending vertex order.
struct ReducedSystem {
    SparseMatrix matrix;
    Eigen::VectorXd rhs;
    std::vector<int> free_vertices;
    std::vector<double> values;  // full-length; pinned entries filled in
};

struct LbsSystems {
    ReducedSystem x;
    ReducedSystem y;
};

inline ReducedSystem eliminate(const SparseMatrix& k, const CoordinateConstraints& cc)
{
    const auto nv = static_cast<std::size_t>(k.rows());
    ReducedSystem sys;
    sys.values = cc.value;
    std::vector<int> slot(nv, -1);
    bool any_fixed = false;
    for (std::size_t v = 0; v < nv; ++v) {
        if (cc.fixed[v]) {
            any_fixed = true;
        } else {
            slot[v] = static_cast<int>(sys.free_vertices.size());
            sys.free_vertices.push_back(static_cast<int>(v));
        }
    }
    if (!any_fixed) throw SolverError("singular Beltrami system: empty constraint set");
    const auto nf = static_cast<Eigen::Index>(sys.free_vertices.size());
    sys.rhs = Eigen::VectorXd::Zero(nf);
    std::vector<Triplet> trip;
    for (int col = 0; col < k.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(k, col); it; ++it) {
            const auto r = static_cast<std::size_t>(it.row()), c = static_cast<std::size_t>(it.col());
            if (slot[r] < 0) continue;
            if (slot[c] >= 0) {
                trip.emplace_back(slot[r], slot[c], it.value());
            } else {
                sys.rhs[slot[r]] -= it.value() * cc.value[c];
            }
        }
    }
    sys.matrix.resize(nf, nf);
    sys.matrix.setFromTriplets(trip.begin(), trip.end());
    return sys;
}

/// Build the x- and y-systems with pinned coordinates eliminated into the
/// right-hand side.
inline LbsSystems assemble(const TriMesh& mesh, const std::vector<AlphaCoeffs>& alphas, const BoundaryConditions& bc)
{
    const SparseMatrix k = stiffness_matrix(mesh, alphas);
    const auto cc = constraints_from(mesh, bc);
    return {eliminate(k, cc[0]), eliminate(k, cc[1])};
}

struct LbsStats {
    SolveStats x;
    SolveStats y;
};

/**
 * Linear Beltrami Solver: the planar PL map on `mesh` with Beltrami
 * coefficient `mu` and boundary data `bc`. Each coordinate is solved by
 * Jacobi-preconditioned CG (default cap 20 * vertex count), optionally
 * started from per-vertex `initial_guess` images.
 */
inline PLMap solve_lbs(const TriMesh& mesh, const BeltramiField& mu, const BoundaryConditions& bc,
                       const SolverConfig& config = {}, LbsStats* stats = nullptr,
                       const std::vector<Point2>* initial_guess = nullptr)
{
    if (initial_guess && initial_guess->size() != mesh.num_vertices()) {
        throw ValidationError("initial guess has " + std::to_string(initial_guess->size()) + " points for " +
                              std::to_string(mesh.num_vertices()) + " vertices");
    }
    if (mu.size() != mesh.num_faces()) {
        throw ValidationError("Beltrami field has " + std::to_string(mu.size()) + " entries for " +
                              std::to_string(mesh.num_faces()) + " faces");
    }
    const auto systems = assemble(mesh, alpha_coeffs(mu), bc);
    const long cap = 20 * static_cast<long>(mesh.num_vertices());
    LbsStats local;
    std::vector<Point2> out(mesh.num_vertices());
    const ReducedSystem* sys[2] = {&systems.x, &systems.y};
    SolveStats* st[2] = {&local.x, &local.y};
    for (int c = 0; c < 2; ++c) {
        Eigen::VectorXd guess;
        if (initial_guess) {
            guess.resize(static_cast<Eigen::Index>(sys[c]->free_vertices.size()));
            for (std::size_t i = 0; i < sys[c]->free_vertices.size(); ++i) {
                guess[static_cast<Eigen::Index>(i)] = (*initial_guess)[static_cast<std::size_t>(sys[c]->free_vertices[i])][c];
            }
        }
        const Eigen::VectorXd sol =
            solve_spd(sys[c]->matrix, sys[c]->rhs, config, cap, st[c], initial_guess ? &guess : nullptr);
        std::vector<double> values = sys[c]->values;
        for (std::size_t i = 0; i < sys[c]->free_vertices.size(); ++i) {
            values[static_cast<std::size_t>(sys[c]->free_vertices[i])] = sol[static_cast<Eigen::Index>(i)];
        }
        for (std::size_t v = 0; v < out.size(); ++v) out[v][c] = values[v];
    }
    if (stats) *stats = local;
    return PLMap::planar(mesh, out);
}

/// Boundary conditions matching a parameter domain: SquareArcs on the
/// corners, or the triangle's three pinned vertices.
inline BoundaryConditions domain_boundary_conditions(const TriMesh& original, const ParamDomain& domain)
{
    if (const auto* sq = std::get_if<UnitSquare>(&domain)) return SquareArcs{sq->corners};
    const auto& tri = std::get<PlaneTriangle>(domain);
    return TriangleFixed{cut_face_anchor_order(original, tri.cut_face), tri.targets};
}

/// Dirichlet data taken from a planar map's boundary images.
inline DirichletFull dirichlet_from_boundary(const PLMap& map)
{
    DirichletFull bc;
    for (const auto& loop : boundary_loops(map.source())) {
        for (int v : loop) bc.targets.emplace_back(v, map.image2(static_cast<std::size_t>(v)));
    }
    return bc;
}

/**
 * Surface map K1 -> K2 with Beltrami representation `mu` (indexed by K1's
 * faces): solve for f~ on phi1(K1), then invert phi2 by locating each image
 * point in phi2(K2) and interpolating K2's vertices barycentrically.
 * `domain1` and `domain2` are the parameterizations of K1 and K2; they must
 * be of the same kind, and triangle domains must share targets.
 */
inline PLMap reconstruct_surface_map(const TriMesh& k1, const TriMesh& k2, const BeltramiField& mu,
                                     const ParamDomain& domain1, const ParamDomain& domain2,
                                     const SolverConfig& config = {})
{
    if (domain1.index() != domain2.index()) throw ValidationError("K1 and K2 domains differ in kind");
    if (mu.size() != k1.num_faces()) throw ValidationError("Beltrami field size does not match K1");
    const PLMap phi1 = parameterize(k1, domain1, config);
    const PLMap phi2 = parameterize(k2, domain2, config);
    const TriMesh d1 = phi1.image_mesh();
    const PLMap f_tilde = solve_lbs(d1, to_domain_faces(mu, domain1), domain_boundary_conditions(k1, domain1), config);
    const TriMesh d2 = phi2.image_mesh();
    const PointLocator locator(d2);
    std::vector<Point3> out(k1.num_vertices());
    for (std::size_t v = 0; v < out.size(); ++v) {
        const auto hit = locator.locate_or_snap(f_tilde.image2(v));
        if (!hit) {
            throw SolverError("reconstruction failed: image of vertex " + std::to_string(v) +
                              " lies outside the target parameter domain");
        }
        const auto& t = d2.faces()[static_cast<std::size_t>(hit->face)];
        out[v] = hit->bary[0] * k2.vertex(t[0]) + hit->bary[1] * k2.vertex(t[1]) + hit->bary[2] * k2.vertex(t[2]);
    }
    return PLMap(k1, std::move(out), k2.dimension());
}

}  // namespace qcbr
