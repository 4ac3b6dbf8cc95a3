#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qcbr/errors.hpp"
#include "qcbr/harmonic.hpp"
#include "qcbr/mesh.hpp"

namespace qcbr
{

using Complex = std::complex<double>;

/// Linear part of an affine map on one face: (x, y) -> (a x + b y, c x + d y).
struct FaceDifferential {
    double a = 1.0, b = 0.0, c = 0.0, d = 1.0;
};

/// Differential of the affine map taking `src` to `img`, obtained from the
/// two edges leaving vertex 0.
inline FaceDifferential face_gradient(const std::array<Point2, 3>& src, const std::array<Point2, 3>& img)
{
    const Point2 e1 = src[1] - src[0], e2 = src[2] - src[0];
    const double det = e1.x() * e2.y() - e1.y() * e2.x();
    if (std::abs(det) <= 1e-14 * e1.norm() * e2.norm() || det == 0.0) {
        throw DegeneracyError("source triangle has zero area");
    }
    const Point2 w1 = img[1] - img[0], w2 = img[2] - img[0];
    FaceDifferential g;
    g.a = (w1.x() * e2.y() - w2.x() * e1.y()) / det;
    g.b = (e1.x() * w2.x() - e2.x() * w1.x()) / det;
    g.c = (w1.y() * e2.y() - w2.y() * e1.y()) / det;
    g.d = (e1.x() * w2.y() - e2.x() * w1.y()) / det;
    return g;
}

/// mu = f_zbar / f_z of the affine part. A zero denominator (f_z = 0) yields
/// the sentinel (+inf, 0).
inline Complex beltrami_coefficient(const FaceDifferential& g)
{
    const Complex num(g.a - g.d, g.c + g.b);
    const Complex den(g.a + g.d, g.c - g.b);
    if (den == Complex(0.0, 0.0)) return {std::numeric_limits<double>::infinity(), 0.0};
    return num / den;
}

/// Per-face Beltrami coefficients with cached sup norm.
class BeltramiField
{
public:
    BeltramiField() = default;
    explicit BeltramiField(std::vector<Complex> values) : values_(std::move(values))
    {
        for (const auto& m : values_) sup_ = std::max(sup_, std::abs(m));
    }
    static BeltramiField constant(std::size_t n, Complex value)
    {
        return BeltramiField(std::vector<Complex>(n, value));
    }

    [[nodiscard]] std::size_t size() const { return values_.size(); }
    [[nodiscard]] const Complex& operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] const std::vector<Complex>& values() const { return values_; }
    [[nodiscard]] double sup_norm() const { return sup_; }
    [[nodiscard]] bool admissible() const { return sup_ < 1.0; }

    /// Faces with |mu| >= 1, ascending.
    [[nodiscard]] std::vector<std::size_t> inadmissible_faces() const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!(std::abs(values_[i]) < 1.0)) out.push_back(i);
        }
        return out;
    }

private:
    std::vector<Complex> values_;
    double sup_ = 0.0;
};

inline FaceDifferential face_differential(const PLMap& map, std::size_t f)
{
    const auto& t = map.source().faces()[f];
    const auto& src = map.source();
    return face_gradient({src.point2(t[0]), src.point2(t[1]), src.point2(t[2])},
                         {map.image2(t[0]), map.image2(t[1]), map.image2(t[2])});
}

/// Beltrami coefficient of every face of a planar-to-planar PL map.
inline BeltramiField beltrami_from_map(const PLMap& map)
{
    if (!map.source().is_planar() || !map.is_planar()) {
        throw ValidationError("beltrami_from_map needs a planar source and planar images");
    }
    std::vector<Complex> mu(map.source().num_faces());
    for (std::size_t f = 0; f < mu.size(); ++f) {
        try {
            mu[f] = beltrami_coefficient(face_differential(map, f));
        } catch (const DegeneracyError&) {
            throw DegeneracyError("source face " + std::to_string(f) + " has zero area");
        }
    }
    return BeltramiField(std::move(mu));
}

/// K = (1 + |mu|) / (1 - |mu|).
inline double dilation(Complex mu)
{
    const double r = std::abs(mu);
    if (!(r < 1.0)) throw InadmissibleError("dilation undefined for |mu| >= 1", -1);
    return (1.0 + r) / (1.0 - r);
}

/// Restriction of a K1-face field to the parameter-domain faces: drop the
/// cut face for triangle domains.
inline BeltramiField to_domain_faces(const BeltramiField& mu, const ParamDomain& domain)
{
    if (const auto* tri = std::get_if<PlaneTriangle>(&domain)) {
        auto v = mu.values();
        v.erase(v.begin() + tri->cut_face);
        return BeltramiField(std::move(v));
    }
    return mu;
}

/// Inverse of `to_domain_faces`; the cut face gets mu = 0, since both
/// parameterizations send it onto the same exterior of the triangle.
inline BeltramiField to_surface_faces(const BeltramiField& mu, const ParamDomain& domain)
{
    if (const auto* tri = std::get_if<PlaneTriangle>(&domain)) {
        auto v = mu.values();
        v.insert(v.begin() + tri->cut_face, Complex(0.0, 0.0));
        return BeltramiField(std::move(v));
    }
    return mu;
}

/**
 * Beltrami representation of f: K1 -> K2, where K2 shares K1's connectivity
 * and vertex i of K2 is f(vertex i of K1). Both meshes are parameterized
 * over the same domain kind with the same anchor indices; the result is
 * mu of phi2 o f o phi1^-1 on each face of phi1(K1), indexed by K1's faces.
 */
inline BeltramiField compute_representation(const TriMesh& k1, const TriMesh& k2, const ParamDomain& domain,
                                             const SolverConfig& config = {})
{
    if (k1.num_vertices() != k2.num_vertices() || k1.faces() != k2.faces()) {
        throw ValidationError("K1 and K2 must share connectivity for a vertex correspondence");
    }
    const PLMap phi1 = parameterize(k1, domain, config);
    const PLMap phi2 = parameterize(k2, domain, config);
    const PLMap f_tilde(phi1.image_mesh(), phi2.images(), Dimension::Planar);
    return to_surface_faces(beltrami_from_map(f_tilde), domain);
}

inline BeltramiField compute_representation(const PLMap& f, const ParamDomain& domain, const SolverConfig& config = {})
{
    return compute_representation(f.source(), f.image_mesh(), domain, config);
}

}  // namespace qcbr
