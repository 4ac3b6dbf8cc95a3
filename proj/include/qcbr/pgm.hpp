#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "qcbr/errors.hpp"
#include "qcbr/mvcodec.hpp"

namespace qcbr
{

namespace detail
{

/// Next whitespace-delimited header token, skipping '#' comments.
inline std::string pgm_token(std::istream& in)
{
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw FormatError("PGM header truncated");
    return tok;
}

inline int pgm_int(std::istream& in, const char* what)
{
    const std::string tok = pgm_token(in);
    if (!std::all_of(tok.begin(), tok.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); }) ||
        tok.size() > 9) {
        throw FormatError(std::string("PGM ") + what + " is not a positive integer: '" + tok + "'");
    }
    return std::stoi(tok);
}

}  // namespace detail

/// Binary 8-bit PGM (P5). Values are rescaled to [0, 255] when maxval < 255.
inline Frame read_pgm(std::istream& in)
{
    if (detail::pgm_token(in) != "P5") throw FormatError("not a binary PGM (expected magic P5)");
    const int w = detail::pgm_int(in, "width");
    const int h = detail::pgm_int(in, "height");
    const int maxval = detail::pgm_int(in, "maxval");
    if (maxval < 1 || maxval > 255) throw FormatError("PGM maxval " + std::to_string(maxval) + " unsupported (8-bit only)");
    if (w < Frame::kMinSize || h < Frame::kMinSize) {
        throw FormatError("PGM frame " + std::to_string(w) + "x" + std::to_string(h) + " is smaller than 16x16");
    }
    std::vector<unsigned char> raw(static_cast<std::size_t>(w) * h);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
        throw FormatError("PGM pixel data truncated: expected " + std::to_string(raw.size()) + " bytes, got " +
                          std::to_string(in.gcount()));
    }
    std::vector<double> px(raw.size());
    const double scale = 255.0 / maxval;
    for (std::size_t i = 0; i < raw.size(); ++i) px[i] = maxval == 255 ? raw[i] : std::round(raw[i] * scale);
    return Frame(w, h, std::move(px));
}

inline Frame load_pgm(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path);
    try {
        return read_pgm(in);
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what());
    }
}

/// Intensities are rounded and clamped to [0, 255].
inline void write_pgm(std::ostream& out, const Frame& f)
{
    out << "P5\n" << f.width() << ' ' << f.height() << "\n255\n";
    std::vector<char> raw(f.pixels().size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        raw[i] = static_cast<char>(static_cast<unsigned char>(std::clamp(std::lround(f.pixels()[i]), 0L, 255L)));
    }
    out.write(raw.data(), static_cast<std::streamsize>(raw.size()));
}

inline void save_pgm(const std::string& path, const Frame& f)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write " + path);
    write_pgm(out, f);
    if (!out) throw FormatError("write failed: " + path);
}

}  // namespace qcbr
