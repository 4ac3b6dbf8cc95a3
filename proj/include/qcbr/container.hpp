#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "qcbr/errors.hpp"
#include "qcbr/fourier.hpp"
#include "qcbr/mvcodec.hpp"
#include "qcbr/texcodec.hpp"

namespace qcbr
{

enum class PayloadKind : std::uint8_t { MapCode = 0, TexturePatch = 1, PFrame = 2, Gop = 3 };

/// Coefficient as stored: 16-bit indices, 32-bit float parts.
struct PackedEntry {
    std::uint16_t j = 0;
    std::uint16_t k = 0;
    float re = 0.0f;
    float im = 0.0f;
    friend bool operator==(const PackedEntry&, const PackedEntry&) = default;
};

/**
 * One QCBR record, little-endian on disk:
 *   "QCBR" | version u8 | kind u8 | N u32 | entry count u32 |
 *   entries (j u16, k u16, re f32, im f32) | boundary count u32 |
 *   records (index u32, x f32, y f32) | clamp delta f32
 */
struct Container {
    static constexpr std::uint8_t kVersion = 1;
    static constexpr char kMagic[4] = {'Q', 'C', 'B', 'R'};

    std::uint8_t version = kVersion;
    PayloadKind kind = PayloadKind::MapCode;
    std::uint32_t n = 0;
    std::vector<PackedEntry> entries;
    std::vector<BoundaryRecord> boundary;
    float clamp_delta = 1e-3f;

    friend bool operator==(const Container&, const Container&) = default;
};

namespace detail
{

class ByteWriter
{
public:
    explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v)
    {
        out_.push_back(static_cast<std::uint8_t>(v));
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v)
    {
        for (int s = 0; s < 32; s += 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

private:
    std::vector<std::uint8_t>& out_;
};

class ByteReader
{
public:
    ByteReader(const std::uint8_t* data, std::size_t size, std::size_t offset) : d_(data), size_(size), pos_(offset) {}

    void need(std::size_t bytes, const char* what) const
    {
        if (size_ - pos_ < bytes) {
            throw FormatError("container truncated at byte " + std::to_string(pos_) + ": need " + std::to_string(bytes) +
                              " bytes for " + what + ", " + std::to_string(size_ - pos_) + " left");
        }
    }
    std::uint8_t u8(const char* what)
    {
        need(1, what);
        return d_[pos_++];
    }
    std::uint16_t u16(const char* what)
    {
        need(2, what);
        const auto v = static_cast<std::uint16_t>(d_[pos_] | (d_[pos_ + 1] << 8));
        pos_ += 2;
        return v;
    }
    std::uint32_t u32(const char* what)
    {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(d_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
    [[nodiscard]] std::size_t pos() const { return pos_; }

private:
    const std::uint8_t* d_;
    std::size_t size_;
    std::size_t pos_;
};

}  // namespace detail

inline void serialize(const Container& c, std::vector<std::uint8_t>& out)
{
    if (c.entries.size() > UINT32_MAX || c.boundary.size() > UINT32_MAX) throw ValidationError("container too large");
    out.reserve(out.size() + 22 + 12 * c.entries.size() + 12 * c.boundary.size());
    detail::ByteWriter w(out);
    for (char m : Container::kMagic) w.u8(static_cast<std::uint8_t>(m));
    w.u8(c.version);
    w.u8(static_cast<std::uint8_t>(c.kind));
    w.u32(c.n);
    w.u32(static_cast<std::uint32_t>(c.entries.size()));
    for (const auto& e : c.entries) {
        w.u16(e.j);
        w.u16(e.k);
        w.f32(e.re);
        w.f32(e.im);
    }
    w.u32(static_cast<std::uint32_t>(c.boundary.size()));
    for (const auto& r : c.boundary) {
        w.u32(r.index);
        w.f32(r.x);
        w.f32(r.y);
    }
    w.f32(c.clamp_delta);
}

inline std::vector<std::uint8_t> serialize(const Container& c)
{
    std::vector<std::uint8_t> out;
    serialize(c, out);
    return out;
}

/// Parse one container starting at `offset`; on return `offset` points past
/// it. Lengths are checked before every field read.
inline Container parse(const std::uint8_t* data, std::size_t size, std::size_t& offset)
{
    detail::ByteReader r(data, size, offset);
    const std::size_t start = offset;
    r.need(4, "magic");
    for (int i = 0; i < 4; ++i) {
        if (data[offset + i] != static_cast<std::uint8_t>(Container::kMagic[i])) {
            throw FormatError("bad magic at byte " + std::to_string(offset + i) + " (expected \"QCBR\")");
        }
    }
    (void)r.u32("magic");
    Container c;
    c.version = r.u8("version");
    if (c.version != Container::kVersion) {
        throw FormatError("unknown container version " + std::to_string(c.version) + " at byte " + std::to_string(start + 4));
    }
    const std::uint8_t kind = r.u8("payload kind");
    if (kind > 3) throw FormatError("unknown payload kind " + std::to_string(kind) + " at byte " + std::to_string(start + 5));
    c.kind = static_cast<PayloadKind>(kind);
    c.n = r.u32("N");
    const std::uint32_t ne = r.u32("entry count");
    r.need(static_cast<std::size_t>(ne) * 12, "entries");
    c.entries.resize(ne);
    for (auto& e : c.entries) {
        e.j = r.u16("entry j");
        e.k = r.u16("entry k");
        e.re = r.f32("entry re");
        e.im = r.f32("entry im");
    }
    const std::uint32_t nb = r.u32("boundary count");
    r.need(static_cast<std::size_t>(nb) * 12, "boundary records");
    c.boundary.resize(nb);
    for (auto& b : c.boundary) {
        b.index = r.u32("record index");
        b.x = r.f32("record x");
        b.y = r.f32("record y");
    }
    c.clamp_delta = r.f32("clamp delta");
    offset = r.pos();
    return c;
}

inline Container parse(const std::vector<std::uint8_t>& bytes)
{
    std::size_t off = 0;
    Container c = parse(bytes.data(), bytes.size(), off);
    if (off != bytes.size()) throw FormatError("trailing data after container at byte " + std::to_string(off));
    return c;
}

/// Every container in a concatenated stream.
inline std::vector<Container> parse_stream(const std::vector<std::uint8_t>& bytes)
{
    std::vector<Container> out;
    std::size_t off = 0;
    while (off < bytes.size()) out.push_back(parse(bytes.data(), bytes.size(), off));
    return out;
}

inline std::vector<std::uint8_t> read_bytes(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed: " + path);
}

// Conversions between payloads and containers. Coefficients and records are
// narrowed to 32-bit floats.

inline Container to_container(const SpectralCode& code, PayloadKind kind, std::vector<BoundaryRecord> boundary = {})
{
    if (code.n < 0 || code.n > 65536) throw ValidationError("grid size " + std::to_string(code.n) + " does not fit the container");
    Container c;
    c.kind = kind;
    c.n = static_cast<std::uint32_t>(code.n);
    for (const auto& e : code.entries) {
        c.entries.push_back({static_cast<std::uint16_t>(e.j), static_cast<std::uint16_t>(e.k),
                             static_cast<float>(e.c.real()), static_cast<float>(e.c.imag())});
    }
    c.boundary = std::move(boundary);
    c.clamp_delta = static_cast<float>(code.clamp_delta);
    return c;
}

inline SpectralCode to_spectral_code(const Container& c)
{
    SpectralCode code;
    code.n = static_cast<int>(c.n);
    code.clamp_delta = c.clamp_delta;
    if (!(code.clamp_delta > 0.0 && code.clamp_delta < 1.0)) {
        throw FormatError("container clamp delta " + std::to_string(c.clamp_delta) + " outside (0, 1)");
    }
    for (const auto& e : c.entries) {
        if (e.j >= c.n || e.k >= c.n) {
            throw FormatError("coefficient index (" + std::to_string(e.j) + "," + std::to_string(e.k) + ") outside the " +
                              std::to_string(c.n) + "x" + std::to_string(c.n) + " grid");
        }
        code.entries.push_back({e.j, e.k, Complex(e.re, e.im)});
    }
    return code;
}

inline Container to_container(const EncodedPatch& p)
{
    return to_container(p.code, PayloadKind::TexturePatch, p.boundary);
}

/// Anchors are not stored; they are re-derived from `mesh` as the decoder does.
inline EncodedPatch to_encoded_patch(const Container& c, const TriMesh& mesh)
{
    if (c.kind != PayloadKind::TexturePatch) throw FormatError("container is not a texture patch");
    EncodedPatch p;
    p.code = to_spectral_code(c);
    p.boundary = c.boundary;
    if (!p.raw()) p.anchors = decoder_anchors(mesh, p);
    return p;
}

inline Container to_container(const EncodedPFrame& f)
{
    return to_container(f.code, PayloadKind::PFrame, f.border);
}

inline EncodedPFrame to_encoded_pframe(const Container& c)
{
    if (c.kind != PayloadKind::PFrame) throw FormatError("container is not a P-frame");
    return {to_spectral_code(c), c.boundary};
}

/**
 * A sequence is a stream of containers: a GOP header (kind 3, one record
 * holding frame count, width, height), then one container per frame. I-frames
 * are kind 3 with one record (pixel index, intensity, 0) per pixel; P-frames
 * are kind 2.
 */
inline std::vector<std::uint8_t> serialize(const EncodedSequence& seq)
{
    std::vector<std::uint8_t> out;
    Container head;
    head.kind = PayloadKind::Gop;
    head.boundary.push_back({static_cast<std::uint32_t>(seq.frames.size()), static_cast<float>(seq.width),
                             static_cast<float>(seq.height)});
    serialize(head, out);
    for (const auto& f : seq.frames) {
        if (f.intra) {
            Container c;
            c.kind = PayloadKind::Gop;
            const auto& px = f.pixels.pixels();
            for (std::size_t i = 0; i < px.size(); ++i) {
                c.boundary.push_back({static_cast<std::uint32_t>(i), static_cast<float>(px[i]), 0.0f});
            }
            serialize(c, out);
        } else {
            serialize(to_container(f.motion), out);
        }
    }
    return out;
}

inline EncodedSequence parse_sequence(const std::vector<std::uint8_t>& bytes)
{
    std::size_t off = 0;
    const Container head = parse(bytes.data(), bytes.size(), off);
    if (head.kind != PayloadKind::Gop || head.boundary.size() != 1 || !head.entries.empty()) {
        throw FormatError("stream does not start with a GOP header");
    }
    const auto& h = head.boundary[0];
    EncodedSequence seq{static_cast<int>(h.x), static_cast<int>(h.y), {}};
    if (static_cast<float>(seq.width) != h.x || static_cast<float>(seq.height) != h.y || seq.width < Frame::kMinSize ||
        seq.height < Frame::kMinSize) {
        throw FormatError("GOP header has invalid frame size");
    }
    const std::size_t area = static_cast<std::size_t>(seq.width) * seq.height;
    for (std::uint32_t i = 0; i < h.index; ++i) {
        const std::size_t at = off;
        const Container c = parse(bytes.data(), bytes.size(), off);
        EncodedFrame f;
        if (c.kind == PayloadKind::Gop) {
            if (c.boundary.size() != area) {
                throw FormatError("I-frame at byte " + std::to_string(at) + " has " + std::to_string(c.boundary.size()) +
                                  " pixels, expected " + std::to_string(area));
            }
            std::vector<double> px(area);
            for (std::size_t p = 0; p < area; ++p) {
                if (c.boundary[p].index != p) throw FormatError("I-frame pixels out of order at byte " + std::to_string(at));
                px[p] = c.boundary[p].x;
            }
            f.intra = true;
            f.pixels = Frame(seq.width, seq.height, std::move(px));
        } else if (c.kind == PayloadKind::PFrame) {
            f.motion = to_encoded_pframe(c);
        } else {
            throw FormatError("unexpected payload kind in sequence at byte " + std::to_string(at));
        }
        seq.frames.push_back(std::move(f));
    }
    if (off != bytes.size()) throw FormatError("trailing data after sequence at byte " + std::to_string(off));
    return seq;
}

}  // namespace qcbr
