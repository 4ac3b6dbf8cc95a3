// Compresses the same planar map twice with an equal number of Fourier
// coefficients: once through its Beltrami coefficient and once by
// truncating the coordinate functions directly. Fold-overs are drawn in red
// in the SVG output.
//
//   coordinate_truncation [out_dir] [eps_percent]

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <numbers>

#include "qcbr/qcbr.hpp"

using namespace qcbr;

int main(int argc, char** argv)
{
    const std::filesystem::path out = argc > 1 ? argv[1] : ".";
    const double eps = argc > 2 ? std::atof(argv[2]) : 1.0;
    std::filesystem::create_directories(out);
    const double pi = std::numbers::pi;

    const int n = 32;
    const TriMesh grid = unit_square_grid(n, n);
    std::vector<Point2> img;
    for (std::size_t i = 0; i < grid.num_vertices(); ++i) {
        const Point2 p = grid.point2(i);
        img.emplace_back(p.x() + 0.08 * std::sin(pi * p.x()) * std::cos(2 * pi * p.y()),
                         p.y() + 0.08 * std::sin(2 * pi * p.y()) * std::cos(pi * p.x()));
    }
    const PLMap map = PLMap::planar(grid, img);

    CodecConfig cfg;
    cfg.epsilon_percent = eps;
    const auto mu = beltrami_from_map(map);
    const auto code = compress(grid, mu, cfg);
    const PLMap beltrami = solve_lbs(grid, decompress(code, grid), dirichlet_from_boundary(map));
    const PLMap coords = PLMap::planar(grid, truncate_coordinates(img, n, code.entries.size()));

    std::printf("eps %.2f%%: %zu coefficients, sup|mu| %.3f\n", eps, code.entries.size(), mu.sup_norm());
    std::printf("  Beltrami route:        %4zu folded faces, RMSE %.3e\n", count_folds(beltrami),
                rmse_standard(beltrami.planar_images(), img));
    std::printf("  coordinate truncation: %4zu folded faces, RMSE %.3e\n", count_folds(coords),
                rmse_standard(coords.planar_images(), img));

    save_svg((out / "map_original.svg").string(), map);
    save_svg((out / "map_beltrami.svg").string(), beltrami);
    save_svg((out / "map_coordinates.svg").string(), coords);
    std::printf("wireframes written to %s\n", out.string().c_str());
}
