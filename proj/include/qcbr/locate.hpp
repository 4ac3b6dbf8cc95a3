#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "qcbr/mesh.hpp"

namespace qcbr
{

struct LocatedPoint {
    int face = -1;
    std::array<double, 3> bary{};
};

/**
 * Uniform bucket grid over a planar triangulation.
 *
 * `locate` returns the lowest-index face whose closed triangle contains the
 * query (barycentric coordinates >= -1e-12). `locate_or_snap` falls back to
 * the nearest face within `snap_tolerance` and returns barycentric
 * coordinates of the nearest point on it.
 */
class PointLocator
{
public:
    explicit PointLocator(const TriMesh& mesh, double snap_tolerance = 1e-9)
        : mesh_(&mesh), snap_(snap_tolerance)
    {
        lo_ = mesh.point2(0);
        hi_ = lo_;
        for (std::size_t i = 0; i < mesh.num_vertices(); ++i) {
            lo_ = lo_.cwiseMin(mesh.point2(i));
            hi_ = hi_.cwiseMax(mesh.point2(i));
        }
        const auto res = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(mesh.num_faces()))));
        nx_ = ny_ = std::max(1, res);
        cell_ = (hi_ - lo_).cwiseMax(Point2::Constant(1e-300));
        cell_.x() /= nx_;
        cell_.y() /= ny_;
        buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
        for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
            const auto& t = mesh.faces()[f];
            Point2 flo = mesh.point2(t[0]), fhi = flo;
            for (int c = 1; c < 3; ++c) {
                flo = flo.cwiseMin(mesh.point2(t[c]));
                fhi = fhi.cwiseMax(mesh.point2(t[c]));
            }
            flo.array() -= snap_;
            fhi.array() += snap_;
            const auto [i0, j0] = cell_of(flo);
            const auto [i1, j1] = cell_of(fhi);
            for (int j = j0; j <= j1; ++j) {
                for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(static_cast<int>(f));
            }
        }
    }

    [[nodiscard]] std::optional<LocatedPoint> locate(const Point2& q) const
    {
        if (!in_bounds(q, snap_)) return std::nullopt;
        const auto [i, j] = cell_of(q);
        for (int f : buckets_[static_cast<std::size_t>(j) * nx_ + i]) {
            const auto b = barycentric(f, q);
            if (b[0] >= -1e-12 && b[1] >= -1e-12 && b[2] >= -1e-12) return LocatedPoint{f, b};
        }
        return std::nullopt;
    }

    [[nodiscard]] std::optional<LocatedPoint> locate_or_snap(const Point2& q) const
    {
        if (auto hit = locate(q)) return hit;
        if (!in_bounds(q, snap_)) return std::nullopt;
        const auto [i, j] = cell_of(q);
        double best = std::numeric_limits<double>::infinity();
        LocatedPoint out;
        for (int f : buckets_[static_cast<std::size_t>(j) * nx_ + i]) {
            const auto [dist, b] = nearest_on_face(f, q);
            if (dist < best) {
                best = dist;
                out = {f, b};
            }
        }
        if (best <= snap_) return out;
        return std::nullopt;
    }

    [[nodiscard]] std::array<double, 3> barycentric(int f, const Point2& q) const
    {
        const auto& t = mesh_->faces()[static_cast<std::size_t>(f)];
        const Point2 a = mesh_->point2(t[0]), b = mesh_->point2(t[1]), c = mesh_->point2(t[2]);
        const double area = signed_area(a, b, c);
        return {signed_area(q, b, c) / area, signed_area(a, q, c) / area, signed_area(a, b, q) / area};
    }

private:
    [[nodiscard]] bool in_bounds(const Point2& q, double tol) const
    {
        return q.x() >= lo_.x() - tol && q.x() <= hi_.x() + tol && q.y() >= lo_.y() - tol && q.y() <= hi_.y() + tol;
    }

    [[nodiscard]] std::pair<int, int> cell_of(const Point2& q) const
    {
        const int i = std::clamp(static_cast<int>(std::floor((q.x() - lo_.x()) / cell_.x())), 0, nx_ - 1);
        const int j = std::clamp(static_cast<int>(std::floor((q.y() - lo_.y()) / cell_.y())), 0, ny_ - 1);
        return {i, j};
    }

    [[nodiscard]] std::pair<double, std::array<double, 3>> nearest_on_face(int f, const Point2& q) const
    {
        const auto& t = mesh_->faces()[static_cast<std::size_t>(f)];
        double best = std::numeric_limits<double>::infinity();
        std::array<double, 3> bary{};
        for (int e = 0; e < 3; ++e) {
            const Point2 p0 = mesh_->point2(t[e]), p1 = mesh_->point2(t[(e + 1) % 3]);
            const Point2 d = p1 - p0;
            const double s = std::clamp((q - p0).dot(d) / d.squaredNorm(), 0.0, 1.0);
            const double dist = (p0 + s * d - q).norm();
            if (dist < best) {
                best = dist;
                bary = {0.0, 0.0, 0.0};
                bary[e] = 1.0 - s;
                bary[(e + 1) % 3] = s;
            }
        }
        return {best, bary};
    }

    const TriMesh* mesh_;
    double snap_;
    Point2 lo_, hi_, cell_;
    int nx_ = 1, ny_ = 1;
    std::vector<std::vector<int>> buckets_;
};

}  // namespace qcbr
