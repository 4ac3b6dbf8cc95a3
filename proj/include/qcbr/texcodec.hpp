#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qcbr/beltrami.hpp"
#include "qcbr/errors.hpp"
#include "qcbr/fourier.hpp"
#include "qcbr/harmonic.hpp"
#include "qcbr/lbs.hpp"
#include "qcbr/mesh.hpp"

namespace qcbr
{

/// A disk-topology surface patch with one texture coordinate per vertex.
struct TexturePatch {
    TriMesh mesh;
    std::vector<Point2> uv;
};

/// Vertex index with a point stored at 32-bit precision.
struct BoundaryRecord {
    std::uint32_t index = 0;
    float x = 0.0f;
    float y = 0.0f;
    friend bool operator==(const BoundaryRecord&, const BoundaryRecord&) = default;

    [[nodiscard]] Point2 point() const { return {static_cast<double>(x), static_cast<double>(y)}; }
};

/**
 * Encoded texture patch. Three layouts share this struct:
 *  - full: `boundary` lists every boundary-loop vertex in loop order;
 *  - rectangle: the boundary UVs run around an axis-aligned rectangle and
 *    only its four corner vertices are stored, in loop order starting at the
 *    (min u, min v) corner; these corners are also the harmonic anchors;
 *  - raw: `code.n == 0` and `boundary` holds every vertex's UV.
 */
struct EncodedPatch {
    SpectralCode code;
    std::vector<BoundaryRecord> boundary;
    std::array<int, 4> anchors{};

    [[nodiscard]] bool raw() const { return code.n == 0; }
    friend bool operator==(const EncodedPatch&, const EncodedPatch&) = default;
};

struct TexCodecConfig {
    CodecConfig codec;
    SolverConfig solver;
    /// Store only four corners when the boundary UVs trace a rectangle.
    bool rectangle_boundary = true;
    /// Atlas parts with fewer vertices than this are stored raw.
    std::size_t raw_threshold = 200;
};

namespace detail
{

inline BoundaryRecord make_record(int v, const Point2& p)
{
    return {static_cast<std::uint32_t>(v), static_cast<float>(p.x()), static_cast<float>(p.y())};
}

/// Corner vertices if every boundary UV lies on the sides of the UV bounding
/// rectangle, visited in loop order lo -> (hi.x, lo.y) -> hi -> (lo.x, hi.y).
inline std::optional<std::array<int, 4>> rectangle_corners(const std::vector<int>& loop, const std::vector<Point2>& uv)
{
    if (loop.size() <= 4) return std::nullopt;
    Point2 lo = uv[loop[0]], hi = lo;
    for (int v : loop) {
        lo = lo.cwiseMin(uv[v]);
        hi = hi.cwiseMax(uv[v]);
    }
    const double tol = 1e-12 * std::max(1.0, (hi - lo).maxCoeff());
    const std::array<Point2, 4> cp{lo, Point2(hi.x(), lo.y()), hi, Point2(lo.x(), hi.y())};
    std::array<std::size_t, 4> pos{};
    for (int k = 0; k < 4; ++k) {
        auto it = std::find_if(loop.begin(), loop.end(), [&](int v) { return (uv[v] - cp[k]).lpNorm<Eigen::Infinity>() <= tol; });
        if (it == loop.end()) return std::nullopt;
        pos[k] = static_cast<std::size_t>(it - loop.begin());
    }
    const std::size_t n = loop.size();
    std::size_t prev = 0;
    for (int k = 1; k < 4; ++k) {
        const std::size_t d = (pos[k] + n - pos[0]) % n;
        if (d <= prev) return std::nullopt;
        prev = d;
    }
    for (int k = 0; k < 4; ++k) {
        const std::size_t len = (pos[(k + 1) % 4] + n - pos[k]) % n;
        for (std::size_t i = 1; i < len; ++i) {
            const Point2& p = uv[loop[(pos[k] + i) % n]];
            const double off = (k == 0) ? p.y() - lo.y() : (k == 1) ? p.x() - hi.x() : (k == 2) ? p.y() - hi.y() : p.x() - lo.x();
            if (std::abs(off) > tol) return std::nullopt;
        }
    }
    return std::array<int, 4>{loop[pos[0]], loop[pos[1]], loop[pos[2]], loop[pos[3]]};
}

inline void require_disk(const TriMesh& mesh)
{
    const auto topo = classify_topology(mesh);
    if (topo.kind != Topology::Kind::Disk) {
        throw TopologyError(std::string("texture patch must be a disk, got ") + to_string(topo.kind) +
                            " (chi=" + std::to_string(topo.euler) + ")");
    }
}

}  // namespace detail

/// Faces whose UV image is not positively oriented, ascending.
inline std::vector<std::size_t> folded_uv_faces(const TriMesh& mesh, const std::vector<Point2>& uv)
{
    const auto a = signed_areas(PLMap::planar(mesh, uv));
    std::vector<std::size_t> out;
    for (std::size_t f = 0; f < a.size(); ++f) {
        if (!(a[f] > 0.0)) out.push_back(f);
    }
    return out;
}

/// Store every vertex's UV verbatim.
inline EncodedPatch encode_raw(const TexturePatch& patch, double clamp_delta = 1e-3)
{
    if (patch.uv.size() != patch.mesh.num_vertices()) throw ValidationError("uv count does not match vertex count");
    EncodedPatch enc;
    enc.code.clamp_delta = clamp_delta;
    for (std::size_t v = 0; v < patch.uv.size(); ++v) enc.boundary.push_back(detail::make_record(static_cast<int>(v), patch.uv[v]));
    return enc;
}

/**
 * Harmonic map to the unit square, Beltrami coefficient of uv o phi^-1,
 * Fourier truncation, boundary UVs stored verbatim. Folded UV faces are
 * rejected rather than clamped.
 */
inline EncodedPatch encode_patch(const TexturePatch& patch, const TexCodecConfig& config = {})
{
    const auto& mesh = patch.mesh;
    if (patch.uv.size() != mesh.num_vertices()) throw ValidationError("uv count does not match vertex count");
    detail::require_disk(mesh);
    const auto folded = folded_uv_faces(mesh, patch.uv);
    if (!folded.empty()) {
        std::string list;
        for (std::size_t i = 0; i < folded.size() && i < 16; ++i) list += (i ? "," : "") + std::to_string(folded[i]);
        if (folded.size() > 16) list += ",...";
        throw InadmissibleError(std::to_string(folded.size()) + " folded uv face(s): " + list,
                                static_cast<long>(folded.front()));
    }

    const auto loop = boundary_loop(mesh);
    EncodedPatch enc;
    std::optional<std::array<int, 4>> rect;
    if (config.rectangle_boundary) rect = detail::rectangle_corners(loop, patch.uv);
    enc.anchors = rect ? *rect : default_square_corners(mesh);

    const PLMap phi = harmonic_to_square(mesh, enc.anchors, config.solver);
    const TriMesh domain = phi.image_mesh();
    const BeltramiField mu = beltrami_from_map(PLMap::planar(domain, patch.uv));
    if (const auto bad = mu.inadmissible_faces(); !bad.empty()) {
        throw InadmissibleError("uv map has |mu| >= 1 on face " + std::to_string(bad.front()),
                                static_cast<long>(bad.front()));
    }
    enc.code = compress(domain, mu, config.codec);
    if (rect) {
        for (int v : *rect) enc.boundary.push_back(detail::make_record(v, patch.uv[v]));
    } else {
        for (int v : loop) enc.boundary.push_back(detail::make_record(v, patch.uv[v]));
    }
    return enc;
}

/// True when the records are the four rectangle corners rather than the
/// full loop.
inline bool is_rectangle_layout(const EncodedPatch& enc, const std::vector<int>& loop)
{
    return !enc.raw() && enc.boundary.size() == 4 && loop.size() > 4;
}

/// Anchors the decoder uses: the stored rectangle corners, or the default
/// chord-length corners of the mesh.
inline std::array<int, 4> decoder_anchors(const TriMesh& mesh, const EncodedPatch& enc)
{
    const auto loop = boundary_loop(mesh);
    if (is_rectangle_layout(enc, loop)) {
        return {static_cast<int>(enc.boundary[0].index), static_cast<int>(enc.boundary[1].index),
                static_cast<int>(enc.boundary[2].index), static_cast<int>(enc.boundary[3].index)};
    }
    return default_square_corners(mesh);
}

/// Reconstruct UVs: decompress mu over the harmonic square of `mesh`, then
/// solve the Beltrami system with the stored boundary data.
inline std::vector<Point2> decode_patch(const TriMesh& mesh, const EncodedPatch& enc, const SolverConfig& solver = {})
{
    const auto nv = mesh.num_vertices();
    if (enc.raw()) {
        if (enc.boundary.size() != nv) {
            throw FormatError("raw patch stores " + std::to_string(enc.boundary.size()) + " uvs for " +
                              std::to_string(nv) + " vertices");
        }
        std::vector<Point2> uv(nv);
        for (std::size_t i = 0; i < nv; ++i) {
            if (enc.boundary[i].index != i) throw FormatError("raw patch records out of order");
            uv[i] = enc.boundary[i].point();
        }
        return uv;
    }
    detail::require_disk(mesh);
    const auto loop = boundary_loop(mesh);
    const bool rect = is_rectangle_layout(enc, loop);
    if (!rect) {
        if (enc.boundary.size() != loop.size()) {
            throw FormatError("boundary has " + std::to_string(enc.boundary.size()) + " records but the mesh loop has " +
                              std::to_string(loop.size()) + " vertices");
        }
        for (std::size_t i = 0; i < loop.size(); ++i) {
            if (enc.boundary[i].index != static_cast<std::uint32_t>(loop[i])) {
                throw FormatError("boundary record " + std::to_string(i) + " names vertex " +
                                  std::to_string(enc.boundary[i].index) + ", expected " + std::to_string(loop[i]));
            }
        }
    }
    for (const auto& r : enc.boundary) {
        if (r.index >= nv) throw FormatError("boundary record names vertex " + std::to_string(r.index) + " out of range");
    }

    std::array<int, 4> anchors;
    try {
        anchors = decoder_anchors(mesh, enc);
        (void)detail::corner_positions(loop, anchors);
    } catch (const ValidationError& e) {
        throw FormatError(std::string("rectangle corners do not match the mesh boundary: ") + e.what());
    }
    const PLMap phi = harmonic_to_square(mesh, anchors, solver);
    const TriMesh domain = phi.image_mesh();
    const BeltramiField mu = decompress(enc.code, domain);

    BoundaryConditions bc;
    if (rect) {
        bc = SquareArcs{anchors, enc.boundary[0].point(), enc.boundary[2].point()};
    } else {
        DirichletFull d;
        for (const auto& r : enc.boundary) d.targets.emplace_back(static_cast<int>(r.index), r.point());
        bc = std::move(d);
    }
    return solve_lbs(domain, mu, bc, solver).planar_images();
}

namespace detail
{

inline void require_same_length(std::size_t a, std::size_t b)
{
    if (a != b || a == 0) {
        throw ValidationError("uv sets differ in length (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
    }
}

}  // namespace detail

/// sqrt((1/n) sum |f(v) - g(v)|_1), the L1 norm not squared.
inline double rmse(const std::vector<Point2>& f, const std::vector<Point2>& g)
{
    detail::require_same_length(f.size(), g.size());
    double s = 0;
    for (std::size_t i = 0; i < f.size(); ++i) s += (f[i] - g[i]).lpNorm<1>();
    return std::sqrt(s / static_cast<double>(f.size()));
}

/// Conventional sqrt((1/n) sum |f(v) - g(v)|^2).
inline double rmse_standard(const std::vector<Point2>& f, const std::vector<Point2>& g)
{
    detail::require_same_length(f.size(), g.size());
    double s = 0;
    for (std::size_t i = 0; i < f.size(); ++i) s += (f[i] - g[i]).squaredNorm();
    return std::sqrt(s / static_cast<double>(f.size()));
}

struct PartError {
    std::size_t vertices;
    double rmse;
};

/// Vertex-count weighted mean of per-part errors.
inline double rmse_avg(const std::vector<PartError>& parts)
{
    std::size_t total = 0;
    for (const auto& p : parts) total += p.vertices;
    if (total == 0) throw ValidationError("rmse_avg needs at least one vertex");
    double s = 0;
    for (const auto& p : parts) s += static_cast<double>(p.vertices) / static_cast<double>(total) * p.rmse;
    return s;
}

/// Bits of the fixed container fields: magic, version, kind, N, entry count,
/// boundary count, clamp delta.
inline constexpr std::size_t kHeaderBits = 8 * (4 + 1 + 1 + 4 + 4 + 4 + 4);
inline constexpr std::size_t kEntryBits = 16 + 16 + 32 + 32;
inline constexpr std::size_t kRecordBits = 32 + 32 + 32;

inline std::size_t coded_bits(const EncodedPatch& enc)
{
    return enc.code.entries.size() * kEntryBits + enc.boundary.size() * kRecordBits + kHeaderBits;
}

/// Raw bits (two 32-bit floats per interior vertex) over coded bits; 1 for
/// a patch without interior vertices and an empty code.
inline double compression_ratio(const TexturePatch& patch, const EncodedPatch& enc)
{
    std::vector<char> boundary(patch.mesh.num_vertices(), 0);
    for (const auto& l : boundary_loops(patch.mesh))
        for (int v : l) boundary[v] = 1;
    const auto interior = static_cast<std::size_t>(std::count(boundary.begin(), boundary.end(), 0));
    if (interior == 0 && enc.code.entries.empty()) return 1.0;
    return static_cast<double>(64 * interior) / static_cast<double>(coded_bits(enc));
}

/// One atlas part per edge-connected component of the mesh.
struct AtlasPart {
    SubMesh part;
    EncodedPatch encoded;
};

inline std::vector<AtlasPart> encode_atlas(const TriMesh& mesh, const std::vector<Point2>& uv,
                                           const TexCodecConfig& config = {})
{
    if (uv.size() != mesh.num_vertices()) throw ValidationError("uv count does not match vertex count");
    std::vector<AtlasPart> out;
    for (auto& sub : connected_components(mesh)) {
        std::vector<Point2> local;
        local.reserve(sub.vertex_map.size());
        for (int v : sub.vertex_map) local.push_back(uv[v]);
        TexturePatch patch{sub.mesh, std::move(local)};
        EncodedPatch enc = sub.mesh.num_vertices() < config.raw_threshold
                               ? encode_raw(patch, config.codec.clamp_delta)
                               : encode_patch(patch, config);
        out.push_back({std::move(sub), std::move(enc)});
    }
    return out;
}

/// Decode each part against the corresponding component of `mesh`.
inline std::vector<Point2> decode_atlas(const TriMesh& mesh, const std::vector<EncodedPatch>& parts,
                                        const SolverConfig& solver = {})
{
    const auto comps = connected_components(mesh);
    if (comps.size() != parts.size()) {
        throw FormatError("stream has " + std::to_string(parts.size()) + " patches but the mesh has " +
                          std::to_string(comps.size()) + " components");
    }
    std::vector<Point2> uv(mesh.num_vertices(), Point2::Zero());
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const auto local = decode_patch(comps[i].mesh, parts[i], solver);
        for (std::size_t v = 0; v < local.size(); ++v) uv[comps[i].vertex_map[v]] = local[v];
    }
    return uv;
}

}  // namespace qcbr
