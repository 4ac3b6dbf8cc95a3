#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "qcbr/errors.hpp"
#include "qcbr/mesh.hpp"

namespace qcbr
{

struct SvgStyle {
    double size = 512.0;
    double margin = 8.0;
    double stroke = 0.6;
    /// Fill faces with non-positive signed area.
    bool mark_folds = true;
};

/// Wireframe of a planar map's image, y pointing up, scaled to fit.
inline void write_svg(std::ostream& out, const PLMap& map, const SvgStyle& style = {})
{
    if (!map.is_planar()) throw ValidationError("only planar maps can be plotted");
    const auto& faces = map.source().faces();
    Point2 lo = Point2::Constant(std::numeric_limits<double>::infinity()), hi = -lo;
    for (std::size_t i = 0; i < map.source().num_vertices(); ++i) {
        lo = lo.cwiseMin(map.image2(i));
        hi = hi.cwiseMax(map.image2(i));
    }
    const double ext = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1e-300});
    const double s = (style.size - 2 * style.margin) / ext;
    auto px = [&](const Point2& p) {
        return Point2(style.margin + (p.x() - lo.x()) * s, style.size - style.margin - (p.y() - lo.y()) * s);
    };
    const auto areas = signed_areas(map);

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.size << "\" height=\"" << style.size
        << "\" viewBox=\"0 0 " << style.size << ' ' << style.size << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<g fill=\"none\" stroke=\"black\" stroke-width=\"" << style.stroke << "\" stroke-linejoin=\"round\">\n";
    char buf[160];
    for (std::size_t f = 0; f < faces.size(); ++f) {
        const Point2 a = px(map.image2(faces[f][0])), b = px(map.image2(faces[f][1])), c = px(map.image2(faces[f][2]));
        std::snprintf(buf, sizeof buf, "%.3f,%.3f %.3f,%.3f %.3f,%.3f", a.x(), a.y(), b.x(), b.y(), c.x(), c.y());
        out << "<polygon points=\"" << buf << '"';
        if (style.mark_folds && !(areas[f] > 0.0)) out << " fill=\"red\" fill-opacity=\"0.6\" stroke=\"red\"";
        out << "/>\n";
    }
    out << "</g>\n</svg>\n";
}

inline void save_svg(const std::string& path, const PLMap& map, const SvgStyle& style = {})
{
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path);
    write_svg(out, map, style);
}

}  // namespace qcbr
