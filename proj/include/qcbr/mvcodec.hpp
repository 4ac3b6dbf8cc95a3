#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "qcbr/beltrami.hpp"
#include "qcbr/errors.hpp"
#include "qcbr/fourier.hpp"
#include "qcbr/lbs.hpp"
#include "qcbr/mesh.hpp"
#include "qcbr/texcodec.hpp"

namespace qcbr
{

/// Grayscale frame, row-major, intensities in [0, 255].
class Frame
{
public:
    static constexpr int kMinSize = 16;

    Frame() = default;
    Frame(int width, int height, double fill = 0.0) : Frame(width, height, std::vector<double>(area(width, height), fill)) {}
    Frame(int width, int height, std::vector<double> pixels)
        : w_(width), h_(height), px_(std::move(pixels))
    {
        if (w_ < kMinSize || h_ < kMinSize) {
            throw ValidationError("frame must be at least " + std::to_string(kMinSize) + "x" + std::to_string(kMinSize) +
                                  ", got " + std::to_string(w_) + "x" + std::to_string(h_));
        }
        if (px_.size() != area(w_, h_)) throw ValidationError("frame pixel count does not match its dimensions");
    }

    [[nodiscard]] int width() const { return w_; }
    [[nodiscard]] int height() const { return h_; }
    [[nodiscard]] double at(int x, int y) const { return px_[static_cast<std::size_t>(y) * w_ + x]; }
    double& at(int x, int y) { return px_[static_cast<std::size_t>(y) * w_ + x]; }
    [[nodiscard]] const std::vector<double>& pixels() const { return px_; }

    /// Bilinear sample with coordinates clamped to the pixel-centre range.
    [[nodiscard]] double sample(double x, double y) const
    {
        x = std::clamp(x, 0.0, static_cast<double>(w_ - 1));
        y = std::clamp(y, 0.0, static_cast<double>(h_ - 1));
        const int x0 = std::min(static_cast<int>(x), w_ - 2), y0 = std::min(static_cast<int>(y), h_ - 2);
        const double fx = x - x0, fy = y - y0;
        return (1 - fx) * (1 - fy) * at(x0, y0) + fx * (1 - fy) * at(x0 + 1, y0) + (1 - fx) * fy * at(x0, y0 + 1) +
               fx * fy * at(x0 + 1, y0 + 1);
    }

    friend bool operator==(const Frame&, const Frame&) = default;

private:
    static std::size_t area(int w, int h) { return w > 0 && h > 0 ? static_cast<std::size_t>(w) * h : 0; }

    int w_ = 0;
    int h_ = 0;
    std::vector<double> px_;
};

/// Per-pixel displacement in pixel units; T(q) = q + V(q).
class MVField
{
public:
    MVField() = default;
    MVField(int width, int height, const Point2& fill = Point2::Zero())
        : w_(width), h_(height), v_(static_cast<std::size_t>(width) * height, fill)
    {
        if (width < 2 || height < 2) throw ValidationError("motion field needs at least 2x2 pixels");
    }

    [[nodiscard]] int width() const { return w_; }
    [[nodiscard]] int height() const { return h_; }
    [[nodiscard]] const Point2& at(int x, int y) const { return v_[static_cast<std::size_t>(y) * w_ + x]; }
    Point2& at(int x, int y) { return v_[static_cast<std::size_t>(y) * w_ + x]; }
    [[nodiscard]] const std::vector<Point2>& vectors() const { return v_; }
    std::vector<Point2>& vectors() { return v_; }

    friend bool operator==(const MVField&, const MVField&) = default;

private:
    int w_ = 0;
    int h_ = 0;
    std::vector<Point2> v_;
};

/// Border displacements are stored in pixel units, indexed by the pixel's
/// row-major linear index.
struct EncodedPFrame {
    SpectralCode code;
    std::vector<BoundaryRecord> border;
    friend bool operator==(const EncodedPFrame&, const EncodedPFrame&) = default;
};

struct MVCodecConfig {
    CodecConfig codec{0.5};
    SolverConfig solver;
};

struct PFrameStats {
    /// Faces of T with |mu| >= 1 (including degenerate images) before clamping.
    std::size_t folds = 0;
};

/// One vertex per pixel centre, vertex y*W + x at (x/(W-1), y/(H-1)).
inline TriMesh grid_triangulation(int width, int height)
{
    if (width < 2 || height < 2) throw ValidationError("grid triangulation needs W, H >= 2");
    return unit_square_grid(width, height);
}

/// Pixel-row-major indices of the frame border: 2(W+H) - 4 of them.
inline std::vector<int> border_pixels(int width, int height)
{
    std::vector<int> out;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (y == 0 || y == height - 1 || x == 0 || x == width - 1) out.push_back(y * width + x);
        }
    }
    return out;
}

/// Block-matching result: one displacement and its SAD per block, blocks
/// row-major, with block-centre coordinates.
struct BlockMotion {
    int block = 8;
    int blocks_x = 0;
    int blocks_y = 0;
    std::vector<Point2> vectors;
    std::vector<double> sad;
    std::vector<double> center_x;
    std::vector<double> center_y;
};

/// Sum over a block of |F2(q) - F1(q - d)|, sampling positions clamped.
inline double block_sad(const Frame& f1, const Frame& f2, int x0, int y0, int x1, int y1, int dx, int dy,
                        double stop = std::numeric_limits<double>::infinity())
{
    const int w = f1.width(), h = f1.height();
    double sad = 0;
    for (int y = y0; y < y1 && sad <= stop; ++y) {
        const int sy = std::clamp(y - dy, 0, h - 1);
        for (int x = x0; x < x1; ++x) sad += std::abs(f2.at(x, y) - f1.at(std::clamp(x - dx, 0, w - 1), sy));
    }
    return sad;
}

/**
 * Exhaustive block matching. For each block the displacement d in
 * [-radius, radius]^2 minimising the SAD is chosen; ties go to the smaller
 * |d|, then smaller dy, then smaller dx. Edge blocks are truncated.
 */
inline BlockMotion match_blocks(const Frame& f1, const Frame& f2, int block = 8, int radius = 8)
{
    if (f1.width() != f2.width() || f1.height() != f2.height()) throw ValidationError("frames differ in size");
    if (block < 1) throw ValidationError("block size must be positive");
    if (radius < 0) throw ValidationError("search radius must be non-negative");
    const int w = f1.width(), h = f1.height();
    BlockMotion bm;
    bm.block = block;
    bm.blocks_x = (w + block - 1) / block;
    bm.blocks_y = (h + block - 1) / block;
    for (int bx = 0; bx < bm.blocks_x; ++bx) bm.center_x.push_back(bx * block + (std::min(w, (bx + 1) * block) - bx * block - 1) / 2.0);
    for (int by = 0; by < bm.blocks_y; ++by) bm.center_y.push_back(by * block + (std::min(h, (by + 1) * block) - by * block - 1) / 2.0);

    for (int by = 0; by < bm.blocks_y; ++by) {
        for (int bx = 0; bx < bm.blocks_x; ++bx) {
            const int x0 = bx * block, x1 = std::min(w, x0 + block);
            const int y0 = by * block, y1 = std::min(h, y0 + block);
            double best = block_sad(f1, f2, x0, y0, x1, y1, 0, 0);
            int best_dx = 0, best_dy = 0;
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    const double sad = block_sad(f1, f2, x0, y0, x1, y1, dx, dy, best);
                    const int r2 = dx * dx + dy * dy, b2 = best_dx * best_dx + best_dy * best_dy;
                    const bool better = sad < best ||
                                        (sad == best && (r2 < b2 || (r2 == b2 && (dy < best_dy || (dy == best_dy && dx < best_dx)))));
                    if (better) {
                        best = sad;
                        best_dx = dx;
                        best_dy = dy;
                    }
                }
            }
            bm.vectors.emplace_back(best_dx, best_dy);
            bm.sad.push_back(best);
        }
    }
    return bm;
}

/// Bilinear interpolation of block vectors between block centres, constant
/// beyond the outermost centres.
inline MVField densify(const BlockMotion& bm, int width, int height)
{
    auto bracket = [](const std::vector<double>& c, double p, int& i0, double& t) {
        const int n = static_cast<int>(c.size());
        if (n == 1 || p <= c.front()) {
            i0 = 0;
            t = 0;
        } else if (p >= c.back()) {
            i0 = n - 2;
            t = 1;
        } else {
            i0 = static_cast<int>(std::upper_bound(c.begin(), c.end(), p) - c.begin()) - 1;
            t = (p - c[i0]) / (c[i0 + 1] - c[i0]);
        }
    };
    auto b = [&](int i, int j) { return bm.vectors[static_cast<std::size_t>(j) * bm.blocks_x + i]; };

    MVField v(width, height);
    for (int y = 0; y < height; ++y) {
        int j0;
        double ty;
        bracket(bm.center_y, y, j0, ty);
        const int j1 = std::min(j0 + 1, bm.blocks_y - 1);
        for (int x = 0; x < width; ++x) {
            int i0;
            double tx;
            bracket(bm.center_x, x, i0, tx);
            const int i1 = std::min(i0 + 1, bm.blocks_x - 1);
            v.at(x, y) = (1 - tx) * (1 - ty) * b(i0, j0) + tx * (1 - ty) * b(i1, j0) + (1 - tx) * ty * b(i0, j1) +
                         tx * ty * b(i1, j1);
        }
    }
    return v;
}

/// Block matching followed by bilinear densification to every pixel.
inline MVField estimate_mv(const Frame& f1, const Frame& f2, int block = 8, int radius = 8)
{
    return densify(match_blocks(f1, f2, block, radius), f1.width(), f1.height());
}

namespace detail
{

inline Point2 pixel_scale(int w, int h) { return {static_cast<double>(w - 1), static_cast<double>(h - 1)}; }

/// Transfinite (Coons) interpolation of border displacements over the
/// frame; reproduces constant and affine border data.
inline std::vector<Point2> coons_fill(const std::vector<Point2>& d, int w, int h)
{
    auto at = [&](int x, int y) -> const Point2& { return d[static_cast<std::size_t>(y) * w + x]; };
    std::vector<Point2> out(d);
    for (int y = 1; y + 1 < h; ++y) {
        const double v = static_cast<double>(y) / (h - 1);
        for (int x = 1; x + 1 < w; ++x) {
            const double u = static_cast<double>(x) / (w - 1);
            out[static_cast<std::size_t>(y) * w + x] =
                (1 - u) * at(0, y) + u * at(w - 1, y) + (1 - v) * at(x, 0) + v * at(x, h - 1) -
                ((1 - u) * (1 - v) * at(0, 0) + u * (1 - v) * at(w - 1, 0) + (1 - u) * v * at(0, h - 1) +
                 u * v * at(w - 1, h - 1));
        }
    }
    return out;
}

/// Nearest float. The volatile store keeps GCC 11's SLP vectorizer from
/// folding the narrowing and widening conversions into a no-op.
inline double to_float_precision(double x)
{
    volatile float f = static_cast<float>(x);
    return f;
}

/// Coefficients and clamp delta rounded to the container's 32-bit precision.
inline void round_to_float(SpectralCode& code)
{
    code.clamp_delta = to_float_precision(code.clamp_delta);
    for (auto& e : code.entries) e.c = Complex(to_float_precision(e.c.real()), to_float_precision(e.c.imag()));
}

}  // namespace detail

/// mu of T = id + V on the grid triangulation, folds clamped to modulus
/// 1 - delta, plus the raw border displacements.
inline EncodedPFrame encode_pframe(const MVField& v, const MVCodecConfig& config = {}, PFrameStats* stats = nullptr)
{
    const int w = v.width(), h = v.height();
    const TriMesh grid = grid_triangulation(w, h);
    const Point2 s = detail::pixel_scale(w, h);
    std::vector<Point2> t(grid.num_vertices());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = grid.point2(i) + v.vectors()[i].cwiseQuotient(s);

    const BeltramiField raw = beltrami_from_map(PLMap::planar(grid, t));
    std::vector<Complex> mu(raw.values());
    std::size_t folds = 0;
    for (auto& m : mu) {
        if (!(std::abs(m) < 1.0)) {
            ++folds;
            m = clamp_mu(m, config.codec.clamp_delta);
        }
    }
    if (stats) stats->folds = folds;

    EncodedPFrame enc;
    enc.code = compress(grid, BeltramiField(std::move(mu)), config.codec);
    detail::round_to_float(enc.code);
    for (int p : border_pixels(w, h)) enc.border.push_back(detail::make_record(p, v.vectors()[p]));
    return enc;
}

/// Decompress mu, solve the Beltrami system with the border pinned, and
/// return V = T - id in pixel units. CG starts from the Coons fill of the
/// border; border vectors are the stored values.
inline MVField decode_pframe(const EncodedPFrame& enc, int width, int height, const SolverConfig& solver = {})
{
    const auto border = border_pixels(width, height);
    if (enc.border.size() != border.size()) {
        throw FormatError("P-frame stores " + std::to_string(enc.border.size()) + " border vectors, a " +
                          std::to_string(width) + "x" + std::to_string(height) + " frame has " +
                          std::to_string(border.size()));
    }
    for (std::size_t i = 0; i < border.size(); ++i) {
        if (enc.border[i].index != static_cast<std::uint32_t>(border[i])) {
            throw FormatError("P-frame border record " + std::to_string(i) + " names pixel " +
                              std::to_string(enc.border[i].index) + ", expected " + std::to_string(border[i]));
        }
    }
    const TriMesh grid = grid_triangulation(width, height);
    const Point2 s = detail::pixel_scale(width, height);
    DirichletFull bc;
    std::vector<Point2> disp(grid.num_vertices(), Point2::Zero());
    for (const auto& r : enc.border) {
        bc.targets.emplace_back(static_cast<int>(r.index), grid.point2(r.index) + r.point().cwiseQuotient(s));
        disp[r.index] = r.point();
    }
    disp = detail::coons_fill(disp, width, height);
    std::vector<Point2> guess(grid.num_vertices());
    for (std::size_t i = 0; i < guess.size(); ++i) guess[i] = grid.point2(i) + disp[i].cwiseQuotient(s);
    const PLMap t = solve_lbs(grid, decompress(enc.code, grid), bc, solver, nullptr, &guess);

    MVField v(width, height);
    for (std::size_t i = 0; i < grid.num_vertices(); ++i) v.vectors()[i] = (t.image2(i) - grid.point2(i)).cwiseProduct(s);
    for (const auto& r : enc.border) v.vectors()[r.index] = r.point();
    return v;
}

/// Prediction of the next frame: pred(q) = F1(q - V(q)), bilinear, sampling
/// position clamped to the frame.
inline Frame warp(const Frame& f1, const MVField& v)
{
    if (f1.width() != v.width() || f1.height() != v.height()) throw ValidationError("frame and motion field differ in size");
    Frame out(f1.width(), f1.height());
    for (int y = 0; y < f1.height(); ++y) {
        for (int x = 0; x < f1.width(); ++x) {
            const Point2& d = v.at(x, y);
            out.at(x, y) = f1.sample(x - d.x(), y - d.y());
        }
    }
    return out;
}

inline double mse(const Frame& p, const Frame& q)
{
    if (p.width() != q.width() || p.height() != q.height()) throw ValidationError("frames differ in size");
    double s = 0;
    for (std::size_t i = 0; i < p.pixels().size(); ++i) {
        const double d = p.pixels()[i] - q.pixels()[i];
        s += d * d;
    }
    return s / static_cast<double>(p.pixels().size());
}

/// 10 log10(255^2 / MSE); +inf for identical frames.
inline double psnr(const Frame& p, const Frame& q)
{
    const double m = mse(p, q);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / m);
}

struct GopConfig {
    MVCodecConfig mv;
    /// Frames per group: one I-frame followed by gop_length - 1 P-frames.
    int gop_length = 5;
    int block = 8;
    int radius = 8;
};

/// I-frames carry raw pixels; P-frames carry an encoded motion field.
struct EncodedFrame {
    bool intra = false;
    Frame pixels;
    EncodedPFrame motion;
    friend bool operator==(const EncodedFrame&, const EncodedFrame&) = default;
};

struct EncodedSequence {
    int width = 0;
    int height = 0;
    std::vector<EncodedFrame> frames;
    friend bool operator==(const EncodedSequence&, const EncodedSequence&) = default;
};

struct GopStats {
    /// Reconstruction the decoder will produce, frame by frame.
    std::vector<Frame> reconstructed;
    std::vector<double> psnr;
    std::vector<std::size_t> folds;
};

/**
 * I P P P P ... coding. Each P-frame's motion is estimated (or taken from
 * `motion[i]`) against the previous reconstructed frame, so encoder and
 * decoder drift together.
 */
inline EncodedSequence encode_gop(const std::vector<Frame>& frames, const GopConfig& config = {},
                                  const std::vector<MVField>* motion = nullptr, GopStats* stats = nullptr)
{
    if (frames.size() < 2) throw ValidationError("a sequence needs at least two frames");
    if (config.gop_length < 1) throw ValidationError("GOP length must be positive");
    if (motion && motion->size() != frames.size()) throw ValidationError("one motion field per frame is required");
    EncodedSequence seq{frames[0].width(), frames[0].height(), {}};
    GopStats local;
    Frame recon;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const Frame& f = frames[i];
        if (f.width() != seq.width || f.height() != seq.height) {
            throw ValidationError("frame " + std::to_string(i) + " differs in size from frame 0");
        }
        EncodedFrame ef;
        std::size_t folds = 0;
        if (i % static_cast<std::size_t>(config.gop_length) == 0) {
            ef.intra = true;
            ef.pixels = f;
            recon = f;
        } else {
            const MVField v = motion ? (*motion)[i] : estimate_mv(recon, f, config.block, config.radius);
            PFrameStats ps;
            ef.motion = encode_pframe(v, config.mv, &ps);
            folds = ps.folds;
            recon = warp(recon, decode_pframe(ef.motion, seq.width, seq.height, config.mv.solver));
        }
        local.psnr.push_back(psnr(f, recon));
        local.folds.push_back(folds);
        local.reconstructed.push_back(recon);
        seq.frames.push_back(std::move(ef));
    }
    if (stats) *stats = std::move(local);
    return seq;
}

inline std::vector<Frame> decode_gop(const EncodedSequence& seq, const SolverConfig& solver = {})
{
    if (seq.frames.empty() || !seq.frames.front().intra) throw FormatError("sequence must start with an I-frame");
    std::vector<Frame> out;
    for (const auto& ef : seq.frames) {
        if (ef.intra) {
            if (ef.pixels.width() != seq.width || ef.pixels.height() != seq.height) {
                throw FormatError("I-frame size does not match the sequence");
            }
            out.push_back(ef.pixels);
        } else {
            out.push_back(warp(out.back(), decode_pframe(ef.motion, seq.width, seq.height, solver)));
        }
    }
    return out;
}

}  // namespace qcbr
