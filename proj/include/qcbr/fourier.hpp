#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <fftw3.h>

#include "qcbr/beltrami.hpp"
#include "qcbr/errors.hpp"
#include "qcbr/locate.hpp"
#include "qcbr/mesh.hpp"

namespace qcbr
{

/// N x N complex samples; node (x, y) for integer x, y in [0, N).
class RegularGrid
{
public:
    explicit RegularGrid(int n, Complex fill = {}) : n_(n)
    {
        if (n < 2) throw ValidationError("grid size N must be >= 2, got " + std::to_string(n));
        samples_.assign(static_cast<std::size_t>(n) * n, fill);
    }

    [[nodiscard]] int n() const { return n_; }
    [[nodiscard]] Complex& at(int x, int y) { return samples_[static_cast<std::size_t>(y) * n_ + x]; }
    [[nodiscard]] const Complex& at(int x, int y) const { return samples_[static_cast<std::size_t>(y) * n_ + x]; }
    /// Row-major by y: sample (x, y) at index y*N + x.
    [[nodiscard]] std::vector<Complex>& samples() { return samples_; }
    [[nodiscard]] const std::vector<Complex>& samples() const { return samples_; }

    [[nodiscard]] double energy() const
    {
        return std::accumulate(samples_.begin(), samples_.end(), 0.0,
                               [](double acc, const Complex& c) { return acc + std::norm(c); });
    }

private:
    int n_;
    std::vector<Complex> samples_;
};

struct SpectralEntry {
    int j = 0;
    int k = 0;
    Complex c;
    friend bool operator==(const SpectralEntry&, const SpectralEntry&) = default;
};

/// Retained Fourier coefficients c_{j,k}, sorted by (j, k).
struct SpectralCode {
    int n = 0;
    std::vector<SpectralEntry> entries;
    double clamp_delta = 1e-3;
    friend bool operator==(const SpectralCode&, const SpectralCode&) = default;
};

enum class Selection { LargestMagnitude };

struct CodecConfig {
    double epsilon_percent = 1.0;
    double clamp_delta = 1e-3;
    Selection selection = Selection::LargestMagnitude;
    std::optional<int> grid_n;

    void validate() const
    {
        if (!(epsilon_percent > 0.0 && epsilon_percent <= 100.0)) {
            throw ValidationError("epsilon percent must be in (0, 100], got " + std::to_string(epsilon_percent));
        }
        if (!(clamp_delta > 0.0 && clamp_delta < 1.0)) {
            throw ValidationError("clamp delta must be in (0, 1), got " + std::to_string(clamp_delta));
        }
        if (grid_n && *grid_n < 2) throw ValidationError("grid N override must be >= 2");
    }
};

/// Axis-aligned bounds of a planar mesh; the regular grid spans this box.
struct Bounds {
    Point2 lo;
    Point2 hi;
};

inline Bounds mesh_bounds(const TriMesh& mesh)
{
    Bounds b{mesh.point2(0), mesh.point2(0)};
    for (std::size_t i = 1; i < mesh.num_vertices(); ++i) {
        b.lo = b.lo.cwiseMin(mesh.point2(i));
        b.hi = b.hi.cwiseMax(mesh.point2(i));
    }
    return b;
}

/// Smallest N with N*N >= faces, at least 2.
inline int grid_size_for_faces(std::size_t faces)
{
    auto n = static_cast<std::size_t>(std::sqrt(static_cast<double>(faces)));
    while (n * n < faces) ++n;
    while (n > 0 && (n - 1) * (n - 1) >= faces) --n;
    return static_cast<int>(std::max<std::size_t>(n, 2));
}

/// Each node takes mu of the lowest-index face containing it; nodes outside
/// the mesh get 0. Node (x, y) sits at lo + (x, y) / (N - 1) * (hi - lo).
inline RegularGrid rasterize(const TriMesh& mesh, const BeltramiField& mu, int n)
{
    if (n < 2) throw ValidationError("grid size N must be >= 2, got " + std::to_string(n));
    if (mu.size() != mesh.num_faces()) throw ValidationError("Beltrami field size does not match mesh");
    RegularGrid grid(n);
    const auto b = mesh_bounds(mesh);
    const PointLocator locator(mesh);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const Point2 q(b.lo.x() + (b.hi.x() - b.lo.x()) * x / (n - 1), b.lo.y() + (b.hi.y() - b.lo.y()) * y / (n - 1));
            if (auto hit = locator.locate(q)) grid.at(x, y) = mu[static_cast<std::size_t>(hit->face)];
        }
    }
    return grid;
}

namespace detail
{

/// Unnormalized 2D DFT through FFTW; `sign` is FFTW_FORWARD or FFTW_BACKWARD.
/// Buffers come from fftw_malloc so alignment, and hence the chosen plan,
/// is the same on every call.
inline std::vector<Complex> dft2(const std::vector<Complex>& in, int n, int sign)
{
    const auto count = static_cast<std::size_t>(n) * n;
    auto* buf_in = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * count));
    auto* buf_out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * count));
    if (!buf_in || !buf_out) {
        fftw_free(buf_in);
        fftw_free(buf_out);
        throw std::bad_alloc();
    }
    fftw_plan plan = fftw_plan_dft_2d(n, n, buf_in, buf_out, sign, FFTW_ESTIMATE);
    std::memcpy(buf_in, in.data(), sizeof(fftw_complex) * count);
    fftw_execute(plan);
    std::vector<Complex> out(count);
    std::memcpy(out.data(), buf_out, sizeof(fftw_complex) * count);
    fftw_destroy_plan(plan);
    fftw_free(buf_in);
    fftw_free(buf_out);
    return out;
}

}  // namespace detail

/// All N^2 coefficients c_{j,k} = 1/N^2 sum mu(x,y) e^{-2 pi i (jx + ky)/N},
/// returned as a grid with c_{j,k} stored at (j, k).
inline RegularGrid fourier_coefficients(const RegularGrid& grid)
{
    const int n = grid.n();
    RegularGrid coeffs(n);
    coeffs.samples() = detail::dft2(grid.samples(), n, FFTW_FORWARD);
    const double scale = 1.0 / (static_cast<double>(n) * n);
    for (auto& c : coeffs.samples()) c *= scale;
    return coeffs;
}

/// Number of coefficients kept for a budget of eps percent of N^2.
inline std::size_t retained_count(int n, double epsilon_percent)
{
    const double total = static_cast<double>(n) * n;
    const auto m = static_cast<std::size_t>(std::ceil(epsilon_percent * total / 100.0 - 1e-9));
    return std::clamp<std::size_t>(m, 1, static_cast<std::size_t>(total));
}

/// The `m` coefficients of largest modulus, ties broken by (j, k)
/// ascending, listed in (j, k) order.
inline std::vector<SpectralEntry> largest_coefficients(const RegularGrid& coeffs, std::size_t m)
{
    const int n = coeffs.n();
    std::vector<SpectralEntry> all;
    all.reserve(coeffs.samples().size());
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) all.push_back({j, k, coeffs.at(j, k)});
    }
    m = std::min(m, all.size());
    auto by_rank = [](const SpectralEntry& a, const SpectralEntry& b) {
        const double ma = std::abs(a.c), mb = std::abs(b.c);
        if (ma != mb) return ma > mb;
        if (a.j != b.j) return a.j < b.j;
        return a.k < b.k;
    };
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(m), all.end(), by_rank);
    all.resize(m);
    std::sort(all.begin(), all.end(), [](const SpectralEntry& a, const SpectralEntry& b) {
        return a.j != b.j ? a.j < b.j : a.k < b.k;
    });
    return all;
}

/// Keep the ceil(eps% N^2) coefficients of largest modulus.
inline SpectralCode fft_truncate(const RegularGrid& grid, const CodecConfig& config)
{
    config.validate();
    const int n = grid.n();
    return {n, largest_coefficients(fourier_coefficients(grid), retained_count(n, config.epsilon_percent)),
            config.clamp_delta};
}

/// mu(x, y) = sum over retained entries of c_{j,k} e^{2 pi i (jx + ky)/N}.
inline RegularGrid spectral_reconstruct(const SpectralCode& code)
{
    const int n = code.n;
    RegularGrid coeffs(n);
    for (const auto& e : code.entries) {
        if (e.j < 0 || e.j >= n || e.k < 0 || e.k >= n) {
            throw ValidationError("coefficient index (" + std::to_string(e.j) + "," + std::to_string(e.k) +
                                  ") outside N=" + std::to_string(n));
        }
        coeffs.at(e.j, e.k) = e.c;
    }
    RegularGrid out(n);
    out.samples() = detail::dft2(coeffs.samples(), n, FFTW_BACKWARD);
    return out;
}

/// Rescale to modulus 1 - delta when |mu| exceeds it, keeping the phase.
/// Non-finite values clamp onto the positive real axis.
inline Complex clamp_mu(Complex mu, double delta)
{
    const double cap = 1.0 - delta;
    const double r = std::abs(mu);
    if (!std::isfinite(r)) return {cap, 0.0};
    if (r > cap) return mu * (cap / r);
    return mu;
}

/// Bilinear sample of the grid at each face centroid, then radial clamp.
inline BeltramiField sample_to_faces(const RegularGrid& grid, const TriMesh& mesh, double clamp_delta)
{
    const int n = grid.n();
    const auto b = mesh_bounds(mesh);
    const Point2 ext = (b.hi - b.lo).cwiseMax(Point2::Constant(1e-300));
    std::vector<Complex> mu(mesh.num_faces());
    for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
        const auto& t = mesh.faces()[f];
        const Point2 c = (mesh.point2(t[0]) + mesh.point2(t[1]) + mesh.point2(t[2])) / 3.0;
        const double gx = std::clamp((c.x() - b.lo.x()) / ext.x() * (n - 1), 0.0, static_cast<double>(n - 1));
        const double gy = std::clamp((c.y() - b.lo.y()) / ext.y() * (n - 1), 0.0, static_cast<double>(n - 1));
        const int x0 = std::min(static_cast<int>(gx), n - 2), y0 = std::min(static_cast<int>(gy), n - 2);
        const double fx = gx - x0, fy = gy - y0;
        const Complex v = (1 - fx) * (1 - fy) * grid.at(x0, y0) + fx * (1 - fy) * grid.at(x0 + 1, y0) +
                          (1 - fx) * fy * grid.at(x0, y0 + 1) + fx * fy * grid.at(x0 + 1, y0 + 1);
        mu[f] = clamp_mu(v, clamp_delta);
    }
    return BeltramiField(std::move(mu));
}

inline int codec_grid_size(const TriMesh& mesh, const CodecConfig& config)
{
    return config.grid_n.value_or(grid_size_for_faces(mesh.num_faces()));
}

/// Rasterize mu over the planar domain mesh, transform, truncate.
inline SpectralCode compress(const TriMesh& domain, const BeltramiField& mu, const CodecConfig& config = {})
{
    config.validate();
    return fft_truncate(rasterize(domain, mu, codec_grid_size(domain, config)), config);
}

/// Inverse of `compress`; the result is always admissible.
inline BeltramiField decompress(const SpectralCode& code, const TriMesh& domain)
{
    if (!(code.clamp_delta > 0.0 && code.clamp_delta < 1.0)) throw ValidationError("code has invalid clamp delta");
    return sample_to_faces(spectral_reconstruct(code), domain, code.clamp_delta);
}

/**
 * Fourier truncation applied to per-vertex planar values (image
 * coordinates or displacements) instead of mu: the values on an n x n
 * vertex grid (vertex j*n + i at node (i, j)) are read as the complex field
 * u + iv and only its `keep` largest coefficients are retained. Nothing
 * constrains the result to stay bijective.
 */
inline std::vector<Point2> truncate_coordinates(const std::vector<Point2>& image, int n, std::size_t keep)
{
    if (n < 2 || image.size() != static_cast<std::size_t>(n) * n) {
        throw ValidationError("coordinate truncation needs an n x n vertex grid image");
    }
    RegularGrid grid(n);
    for (std::size_t i = 0; i < image.size(); ++i) grid.samples()[i] = Complex(image[i].x(), image[i].y());
    const SpectralCode code{n, largest_coefficients(fourier_coefficients(grid), keep), 1e-3};
    const RegularGrid back = spectral_reconstruct(code);
    std::vector<Point2> out;
    out.reserve(image.size());
    for (const auto& c : back.samples()) out.emplace_back(c.real(), c.imag());
    return out;
}

}  // namespace qcbr
