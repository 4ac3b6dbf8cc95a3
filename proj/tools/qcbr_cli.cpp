// qcbr: command-line front end for the Beltrami map codec.

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qcbr/qcbr.hpp"

namespace
{

using namespace qcbr;

/// Flags shared by every command that runs the CG solver.
struct SolverFlags {
    double tolerance = 1e-12;
    long max_iterations = 0;

    void add(CLI::App* app)
    {
        app->add_option("--tol", tolerance, "CG relative residual tolerance")->capture_default_str();
        app->add_option("--max-iter", max_iterations, "CG iteration cap (0 = a multiple of the vertex count)");
    }

    [[nodiscard]] SolverConfig config() const
    {
        if (!(tolerance > 0.0 && tolerance < 1.0)) {
            throw ValidationError("--tol must be in (0, 1), got " + std::to_string(tolerance));
        }
        if (max_iterations < 0) throw ValidationError("--max-iter must be non-negative");
        SolverConfig c;
        c.tolerance = tolerance;
        if (max_iterations > 0) c.max_iterations = max_iterations;
        return c;
    }
};

/// Flags shared by the compressing commands.
struct CodecFlags {
    double epsilon = 1.0;
    double delta = 1e-3;
    int grid_n = 0;

    void add(CLI::App* app, double default_eps)
    {
        epsilon = default_eps;
        app->add_option("--eps", epsilon, "percent of Fourier coefficients kept")->capture_default_str();
        app->add_option("--delta", delta, "decoded |mu| is clamped to 1 - delta")->capture_default_str();
        app->add_option("--grid-n", grid_n, "override the N x N sampling grid (0 = ceil(sqrt(faces)))");
    }

    [[nodiscard]] CodecConfig config() const
    {
        CodecConfig c;
        c.epsilon_percent = epsilon;
        c.clamp_delta = delta;
        if (grid_n != 0) c.grid_n = grid_n;
        c.validate();
        return c;
    }
};

/// Domain selection for parameterization.
struct DomainFlags {
    std::string kind = "auto";
    std::vector<int> corners;
    int cut_face = 0;

    void add(CLI::App* app)
    {
        app->add_option("--domain", kind, "auto, square or triangle")->capture_default_str();
        app->add_option("--corners", corners, "four boundary vertices (0-based) sent to the square corners")
            ->expected(4);
        app->add_option("--cut-face", cut_face, "face (0-based) removed for the triangle domain")->capture_default_str();
    }

    [[nodiscard]] ParamDomain domain(const TriMesh& mesh) const
    {
        if (kind == "auto" && corners.empty()) return default_domain(mesh);
        if (kind == "square" || (kind == "auto" && !corners.empty())) {
            if (corners.empty()) return UnitSquare{default_square_corners(mesh)};
            return UnitSquare{{corners[0], corners[1], corners[2], corners[3]}};
        }
        if (kind == "triangle") {
            if (cut_face < 0 || static_cast<std::size_t>(cut_face) >= mesh.num_faces()) {
                throw ValidationError("--cut-face " + std::to_string(cut_face) + " out of range");
            }
            PlaneTriangle t;
            t.cut_face = cut_face;
            return t;
        }
        throw ValidationError("unknown domain '" + kind + "' (expected auto, square or triangle)");
    }
};

std::vector<Point2> require_uv(const ObjData& obj, const std::string& path)
{
    if (!obj.uv) throw FormatError(path + ": no vt records (a map file stores its image as vt)");
    return *obj.uv;
}

void require_planar(const TriMesh& mesh, const std::string& path)
{
    if (!mesh.is_planar()) throw ValidationError(path + ": mesh is not planar (all z must be 0)");
}

/// Beltrami field text file: a "mu <count>" line then one "re im" pair per
/// face. Folded faces are written as "inf 0".
void save_mu(const std::string& path, const BeltramiField& mu)
{
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << "mu " << mu.size() << '\n';
    char buf[96];
    for (const auto& m : mu.values()) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", m.real(), m.imag());
        out << buf;
    }
    if (!out) throw FormatError("write failed for '" + path + "'");
}

BeltramiField load_mu(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    std::string tag;
    long long count = -1;
    if (!(in >> tag >> count) || tag != "mu" || count < 0) {
        throw FormatError(path + ": expected a 'mu <count>' header line");
    }
    std::string line;
    std::getline(in, line);
    std::vector<Complex> values;
    values.reserve(static_cast<std::size_t>(std::min<long long>(count, 1 << 24)));
    auto parse = [&](std::string_view s, long long row) {
        double v = 0.0;
        const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) {
            throw FormatError(path + ": row " + std::to_string(row + 1) + " has a bad number '" + std::string(s) + "'");
        }
        return v;
    };
    for (long long i = 0; i < count; ++i) {
        if (!std::getline(in, line)) {
            throw FormatError(path + ": " + std::to_string(count) + " values declared, " + std::to_string(i) + " present");
        }
        std::istringstream ls(line);
        std::string re, im, extra;
        if (!(ls >> re >> im) || (ls >> extra)) {
            throw FormatError(path + ": row " + std::to_string(i + 1) + " must hold exactly two numbers");
        }
        values.emplace_back(parse(re, i), parse(im, i));
    }
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") != std::string::npos) throw FormatError(path + ": trailing data after the last row");
    }
    return BeltramiField(std::move(values));
}

void save_map(const std::string& path, const PLMap& map)
{
    const auto img = map.planar_images();
    save_obj(path, map.source(), &img);
}

std::vector<BoundaryRecord> boundary_records(const TriMesh& mesh, const std::vector<Point2>& image)
{
    std::vector<BoundaryRecord> out;
    for (const auto& loop : boundary_loops(mesh)) {
        for (int v : loop) out.push_back(detail::make_record(v, image[v]));
    }
    return out;
}

/// Planar map OBJ -> its Beltrami coefficient on the source (planar
/// source) or on the harmonic square parameterization (surface source).
BeltramiField map_beltrami(const ObjData& obj, const std::vector<Point2>& uv, const DomainFlags& dom,
                           const SolverConfig& solver)
{
    if (obj.mesh.is_planar()) return beltrami_from_map(PLMap::planar(obj.mesh, uv));
    const ParamDomain d = dom.domain(obj.mesh);
    if (!std::holds_alternative<UnitSquare>(d)) {
        throw ValidationError("a surface with a planar image needs the square domain");
    }
    const PLMap phi = parameterize(obj.mesh, d, solver);
    return beltrami_from_map(PLMap::planar(phi.image_mesh(), uv));
}

void print_metric(const std::string& human, const std::string& key, double value)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", value);
    std::cout << human << ": " << buf << '\n' << key << '=' << buf << '\n';
}

std::string frame_path(const std::string& prefix, std::size_t i)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04zu.pgm", i);
    return prefix + buf;
}

/// Parsed flags plus one member per subcommand.
struct Commands {
    SolverFlags solver;
    CodecFlags codec;
    DomainFlags domain;
    std::vector<std::string> paths;
    std::string boundary_path;
    std::string mu_path;
    bool no_rectangle = false;
    std::size_t raw_threshold = 200;
    int gop = 5, block = 8, radius = 8;
    bool plot_source = false, plot_no_folds = false;
    double plot_size = 512.0;
    std::string metric;

    int param()
    {
        const auto obj = load_obj(paths[0]);
        const PLMap phi = parameterize(obj.mesh, domain.domain(obj.mesh), solver.config());
        save_map(paths[1], phi);
        std::cout << "parameterized " << obj.mesh.num_vertices() << " vertices, " << obj.mesh.num_faces()
                  << " faces\n";
        return 0;
    }

    int beltrami()
    {
        const auto obj = load_obj(paths[0]);
        const auto mu = map_beltrami(obj, require_uv(obj, paths[0]), domain, solver.config());
        save_mu(paths[1], mu);
        const auto bad = mu.inadmissible_faces();
        std::cout << mu.size() << " faces, sup|mu| = " << mu.sup_norm() << ", folded faces: " << bad.size() << '\n';
        return 0;
    }

    int lbs()
    {
        const auto obj = load_obj(paths[0]);
        require_planar(obj.mesh, paths[0]);
        const auto mu = load_mu(paths[1]);
        BoundaryConditions bc;
        if (!boundary_path.empty()) {
            const auto b = load_obj(boundary_path);
            if (b.mesh.num_vertices() != obj.mesh.num_vertices()) {
                throw ValidationError(boundary_path + ": vertex count differs from the domain mesh");
            }
            bc = dirichlet_from_boundary(PLMap::planar(obj.mesh, require_uv(b, boundary_path)));
        } else {
            const auto d = domain.domain(obj.mesh);
            if (!std::holds_alternative<UnitSquare>(d)) throw ValidationError("lbs without --boundary needs the square domain");
            bc = SquareArcs{std::get<UnitSquare>(d).corners};
        }
        LbsStats st;
        const PLMap f = solve_lbs(obj.mesh, mu, bc, solver.config(), &st);
        save_map(paths[2], f);
        std::cout << "CG iterations " << st.x.iterations << " + " << st.y.iterations << ", folds " << count_folds(f)
                  << '\n';
        return 0;
    }

    int compress_map()
    {
        const auto obj = load_obj(paths[0]);
        require_planar(obj.mesh, paths[0]);
        const auto uv = require_uv(obj, paths[0]);
        const auto mu = beltrami_from_map(PLMap::planar(obj.mesh, uv));
        if (!mu.admissible()) {
            const auto bad = mu.inadmissible_faces();
            throw InadmissibleError("map folds at " + std::to_string(bad.size()) + " faces (first: face " +
                                        std::to_string(bad.front()) + ")",
                                    static_cast<long>(bad.front()));
        }
        const auto code = qcbr::compress(obj.mesh, mu, codec.config());
        const auto bytes = serialize(to_container(code, PayloadKind::MapCode, boundary_records(obj.mesh, uv)));
        write_bytes(paths[1], bytes);
        std::cout << "N=" << code.n << ", " << code.entries.size() << " coefficients, " << bytes.size() << " bytes\n";
        return 0;
    }

    int decompress_map()
    {
        const auto obj = load_obj(paths[0]);
        require_planar(obj.mesh, paths[0]);
        const Container c = parse(read_bytes(paths[1]));
        if (c.kind != PayloadKind::MapCode) throw FormatError(paths[1] + ": not a map-code container");
        const auto mu = qcbr::decompress(to_spectral_code(c), obj.mesh);
        DirichletFull bc;
        for (const auto& r : c.boundary) {
            if (r.index >= obj.mesh.num_vertices()) {
                throw FormatError(paths[1] + ": boundary record for vertex " + std::to_string(r.index) +
                                  " outside the mesh");
            }
            bc.targets.emplace_back(static_cast<int>(r.index), r.point());
        }
        const PLMap f = solve_lbs(obj.mesh, mu, bc, solver.config());
        save_map(paths[2], f);
        if (!mu_path.empty()) save_mu(mu_path, mu);
        std::cout << "decoded " << obj.mesh.num_vertices() << " vertices, folds " << count_folds(f) << '\n';
        return 0;
    }

    int tex_encode()
    {
        const auto obj = load_obj(paths[0]);
        TexCodecConfig cfg;
        cfg.codec = codec.config();
        cfg.solver = solver.config();
        cfg.rectangle_boundary = !no_rectangle;
        cfg.raw_threshold = raw_threshold;
        const auto parts = encode_atlas(obj.mesh, require_uv(obj, paths[0]), cfg);
        std::vector<std::uint8_t> bytes;
        for (const auto& p : parts) serialize(to_container(p.encoded), bytes);
        write_bytes(paths[1], bytes);
        std::cout << parts.size() << " patches, " << bytes.size() << " bytes\n";
        return 0;
    }

    int tex_decode()
    {
        const auto obj = load_obj(paths[0]);
        const auto containers = parse_stream(read_bytes(paths[1]));
        const auto comps = connected_components(obj.mesh);
        if (containers.size() != comps.size()) {
            throw FormatError(paths[1] + ": " + std::to_string(containers.size()) + " patches for " +
                              std::to_string(comps.size()) + " mesh components");
        }
        std::vector<EncodedPatch> parts;
        for (std::size_t i = 0; i < comps.size(); ++i) {
            if (containers[i].kind != PayloadKind::TexturePatch) throw FormatError(paths[1] + ": not a texture stream");
            parts.push_back(to_encoded_patch(containers[i], comps[i].mesh));
        }
        const auto uv = decode_atlas(obj.mesh, parts, solver.config());
        save_obj(paths[2], obj.mesh, &uv);
        std::cout << "decoded " << parts.size() << " patches\n";
        return 0;
    }

    int vid_encode()
    {
        std::vector<Frame> frames;
        for (std::size_t i = 1; i < paths.size(); ++i) frames.push_back(load_pgm(paths[i]));
        GopConfig cfg;
        cfg.mv.codec = codec.config();
        cfg.mv.solver = solver.config();
        cfg.gop_length = gop;
        cfg.block = block;
        cfg.radius = radius;
        if (block < 1 || radius < 0) throw ValidationError("--block must be positive and --radius non-negative");
        GopStats st;
        const auto bytes = serialize(encode_gop(frames, cfg, nullptr, &st));
        write_bytes(paths[0], bytes);
        for (std::size_t i = 0; i < st.psnr.size(); ++i) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "frame %zu: PSNR %.3f dB, folds clamped %zu\n", i, st.psnr[i], st.folds[i]);
            std::cout << buf;
        }
        std::cout << bytes.size() << " bytes\n";
        return 0;
    }

    int vid_decode()
    {
        const auto frames = decode_gop(parse_sequence(read_bytes(paths[0])), solver.config());
        for (std::size_t i = 0; i < frames.size(); ++i) save_pgm(frame_path(paths[1], i), frames[i]);
        std::cout << "wrote " << frames.size() << " frames\n";
        return 0;
    }

    int metrics()
    {
        if (metric == "rmse") {
            if (paths.size() != 2) throw ValidationError("metrics rmse takes two map files");
            const auto a = load_obj(paths[0]), b = load_obj(paths[1]);
            const auto ua = require_uv(a, paths[0]), ub = require_uv(b, paths[1]);
            print_metric("RMSE (sqrt of mean L1 vertex error)", "rmse", rmse(ua, ub));
            print_metric("RMSE (root mean squared distance)", "rmse_standard", rmse_standard(ua, ub));
        } else if (metric == "psnr") {
            if (paths.size() != 2) throw ValidationError("metrics psnr takes two PGM files");
            print_metric("PSNR (dB)", "psnr", psnr(load_pgm(paths[0]), load_pgm(paths[1])));
        } else if (metric == "cr") {
            if (paths.empty() || paths.size() > 2) throw ValidationError("metrics cr takes a container and, for textures, the mesh");
            const auto bytes = read_bytes(paths[0]);
            const auto containers = parse_stream(bytes);
            double raw_bits = 0.0;
            if (!containers.empty() && containers.front().kind == PayloadKind::Gop) {
                const auto seq = parse_sequence(bytes);
                raw_bits = 8.0 * seq.width * seq.height * static_cast<double>(seq.frames.size());
            } else {
                if (paths.size() != 2) throw ValidationError("metrics cr on a map or texture stream needs the mesh");
                const auto obj = load_obj(paths[1]);
                std::size_t interior = 0;
                for (const auto& comp : connected_components(obj.mesh)) {
                    std::size_t border = 0;
                    for (const auto& l : boundary_loops(comp.mesh)) border += l.size();
                    interior += comp.mesh.num_vertices() - border;
                }
                raw_bits = 64.0 * static_cast<double>(interior);
            }
            const double coded_bits = 8.0 * static_cast<double>(bytes.size());
            print_metric("raw bits", "raw_bits", raw_bits);
            print_metric("coded bits", "coded_bits", coded_bits);
            print_metric("compression ratio", "cr", raw_bits / coded_bits);
        } else {
            throw ValidationError("unknown metric '" + metric + "' (expected rmse, psnr or cr)");
        }
        return 0;
    }

    int plot()
    {
        const auto obj = load_obj(paths[0]);
        SvgStyle style;
        style.size = plot_size;
        style.mark_folds = !plot_no_folds;
        if (!(plot_size > 2 * style.margin)) throw ValidationError("--size is too small");
        if (plot_source) {
            require_planar(obj.mesh, paths[0]);
            std::vector<Point2> pts;
            for (std::size_t i = 0; i < obj.mesh.num_vertices(); ++i) pts.push_back(obj.mesh.point2(i));
            save_svg(paths[1], PLMap::planar(obj.mesh, pts), style);
        } else {
            save_svg(paths[1], PLMap::planar(obj.mesh, require_uv(obj, paths[0])), style);
        }
        return 0;
    }
};

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"qcbr: Beltrami-coefficient codec for bijective piecewise-linear maps"};
    app.require_subcommand(1);
    Commands cmd;
    int (Commands::*run)() = nullptr;

    auto sub = [&](const char* name, const char* help, int (Commands::*fn)()) {
        CLI::App* s = app.add_subcommand(name, help);
        s->callback([&run, fn] { run = fn; });
        return s;
    };
    auto files = [&](CLI::App* s, const char* what, int count) {
        s->add_option("files", cmd.paths, what)->required()->expected(count);
    };

    auto* param = sub("param", "harmonic parameterization of a mesh, written as a map OBJ", &Commands::param);
    files(param, "MESH.obj OUT.obj", 2);
    cmd.domain.add(param);
    cmd.solver.add(param);

    auto* bel = sub("beltrami", "per-face Beltrami coefficient of a map OBJ", &Commands::beltrami);
    files(bel, "MAP.obj OUT.mu", 2);
    cmd.domain.add(bel);
    cmd.solver.add(bel);

    auto* lbs = sub("lbs", "reconstruct a map from a Beltrami field", &Commands::lbs);
    files(lbs, "DOMAIN.obj MU OUT.obj", 3);
    lbs->add_option("--boundary", cmd.boundary_path, "map OBJ whose boundary images are pinned");
    cmd.domain.add(lbs);
    cmd.solver.add(lbs);

    auto* comp = sub("compress", "compress a planar map into a QCBR container", &Commands::compress_map);
    files(comp, "MAP.obj OUT.qcbr", 2);
    cmd.codec.add(comp, 1.0);

    auto* dec = sub("decompress", "decode a QCBR map container on its domain mesh", &Commands::decompress_map);
    files(dec, "MESH.obj IN.qcbr OUT.obj", 3);
    dec->add_option("--mu", cmd.mu_path, "also write the decoded Beltrami field");
    cmd.solver.add(dec);

    auto* tenc = sub("tex-encode", "compress the texture coordinates of a mesh", &Commands::tex_encode);
    files(tenc, "MESH.obj OUT.qcbr", 2);
    cmd.codec.add(tenc, 1.0);
    cmd.solver.add(tenc);
    tenc->add_flag("--no-rectangle", cmd.no_rectangle, "always store the full boundary loop");
    tenc->add_option("--raw-threshold", cmd.raw_threshold, "store parts with fewer vertices raw")->capture_default_str();

    auto* tdec = sub("tex-decode", "restore texture coordinates from a QCBR stream", &Commands::tex_decode);
    files(tdec, "MESH.obj IN.qcbr OUT.obj", 3);
    cmd.solver.add(tdec);

    auto* venc = sub("vid-encode", "encode PGM frames with Beltrami-coded motion", &Commands::vid_encode);
    venc->add_option("files", cmd.paths, "OUT.qcbr FRAME.pgm...")->required()->expected(3, -1);
    cmd.codec.add(venc, 0.5);
    cmd.solver.add(venc);
    venc->add_option("--gop", cmd.gop, "frames per group of pictures")->capture_default_str();
    venc->add_option("--block", cmd.block, "block size for motion search")->capture_default_str();
    venc->add_option("--radius", cmd.radius, "motion search radius in pixels")->capture_default_str();

    auto* vdec = sub("vid-decode", "decode a QCBR video to PREFIX0000.pgm, ...", &Commands::vid_decode);
    files(vdec, "IN.qcbr PREFIX", 2);
    cmd.solver.add(vdec);

    auto* met = sub("metrics", "rmse A.obj B.obj | psnr A.pgm B.pgm | cr IN.qcbr [MESH.obj]", &Commands::metrics);
    met->add_option("metric", cmd.metric, "rmse, psnr or cr")->required();
    met->add_option("files", cmd.paths, "inputs")->required()->expected(1, 2);

    auto* plot = sub("plot", "SVG wireframe of a planar map image", &Commands::plot);
    files(plot, "MAP.obj OUT.svg", 2);
    plot->add_flag("--source", cmd.plot_source, "draw the source mesh instead of the image");
    plot->add_flag("--no-folds", cmd.plot_no_folds, "do not highlight folded faces");
    plot->add_option("--size", cmd.plot_size, "canvas size in pixels")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        const auto chosen = app.get_subcommands();
        std::cerr << (chosen.empty() ? app.help() : chosen.front()->help());
        return 1;
    }

    try {
        return (cmd.*run)();
    } catch (const qcbr::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::bad_alloc&) {
        std::cerr << "error: out of memory\n";
        return 4;
    }
}
