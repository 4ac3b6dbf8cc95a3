// Encode the uv map of a curved patch as its Beltrami representation,
// decode it, and report size and error per coefficient budget. SVG
// wireframes of the original and decoded uv layouts go to the output
// directory.
//
//   texture_roundtrip [out_dir]

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <string>

#include "qcbr/qcbr.hpp"

using namespace qcbr;

int main(int argc, char** argv)
{
    const std::filesystem::path out = argc > 1 ? argv[1] : ".";
    std::filesystem::create_directories(out);
    const double pi = std::numbers::pi;

    // Height field z = 0.3 sin(pi x) sin(pi y) over a 48x48 grid.
    const int n = 48;
    const TriMesh flat = unit_square_grid(n, n);
    std::vector<Point3> v = flat.vertices();
    for (auto& p : v) p.z() = 0.3 * std::sin(pi * p.x()) * std::sin(pi * p.y());
    const TriMesh mesh(std::move(v), flat.faces(), Dimension::Spatial);

    // Texture coordinates: a smooth side-preserving swirl of the square.
    std::vector<Point2> uv;
    for (const auto& p : mesh.vertices()) {
        const double x = p.x(), y = p.y();
        uv.emplace_back(x + 0.06 * std::sin(pi * x) * std::cos(pi * y), y + 0.06 * std::sin(pi * y) * std::sin(2 * pi * x));
    }
    const TexturePatch patch{mesh, uv};
    save_svg((out / "uv_original.svg").string(), PLMap::planar(mesh, uv));

    std::printf("%-6s %8s %10s %12s %12s %6s\n", "eps%", "coeffs", "CR", "RMSE", "RMSE(std)", "folds");
    for (double eps : {0.5, 1.0, 3.0, 10.0}) {
        TexCodecConfig cfg;
        cfg.codec.epsilon_percent = eps;
        const auto enc = encode_patch(patch, cfg);
        const auto dec = decode_patch(mesh, enc);
        std::printf("%-6.1f %8zu %10.2f %12.4e %12.4e %6zu\n", eps, enc.code.entries.size(), compression_ratio(patch, enc),
                    rmse(dec, uv), rmse_standard(dec, uv), folded_uv_faces(mesh, dec).size());
        char name[64];
        std::snprintf(name, sizeof name, "uv_decoded_eps%g.svg", eps);
        save_svg((out / name).string(), PLMap::planar(mesh, dec));
    }
    std::printf("wireframes written to %s\n", out.string().c_str());
}
