#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "abp/io.hpp"
#include "abp/svg.hpp"
#include "abp/verify.hpp"

namespace fs = std::filesystem;
using namespace abp;

namespace {

struct CommonOpts {
    std::string field = "bump";
    std::string domain;  // "disk:cx,cy,r" or "rect:x0,y0,x1,y1"; empty = recommended
    int nx = 1024, ny = 0;
    int zcount = 512;
    std::uint64_t seed = 42;
    std::string out = ".";
    bool serial = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--field", o.field, "builtin field id or path to a field-spec JSON file");
    cmd->add_option("--domain", o.domain, "disk:cx,cy,r or rect:x0,y0,x1,y1 (default: recommended)");
    cmd->add_option("--grid", [&o](const std::vector<std::string>& v) {
        int a = 0, b = 0;
        if (std::sscanf(v[0].c_str(), "%d,%d", &a, &b) >= 1) {
            o.nx = a;
            o.ny = b;
            return true;
        }
        return false;
    }, "grid nodes: N or NX,NY (default 1024)");
    cmd->add_option("--zcount", o.zcount, "number of z samples (default 512)");
    cmd->add_option("--seed", o.seed, "seed for randomized trials");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_flag("--serial", o.serial, "disable the parallel kernels");
}

Domain parse_domain(const std::string& s) {
    double a, b, c, d;
    if (std::sscanf(s.c_str(), "disk:%lf,%lf,%lf", &a, &b, &c) == 3)
        return Domain::make_disk({a, b}, c);
    if (std::sscanf(s.c_str(), "rect:%lf,%lf,%lf,%lf", &a, &b, &c, &d) == 4)
        return Domain::make_rect({a, b}, {c, d});
    throw std::invalid_argument("cannot parse domain: " + s);
}

CatalogEntry resolve(const CommonOpts& o) {
    CatalogEntry e = resolve_field(o.field);
    if (!o.domain.empty()) e.domain = parse_domain(o.domain);
    return e;
}

SuiteConfig make_config(const CommonOpts& o) {
    SuiteConfig cfg;
    cfg.nx = o.nx;
    cfg.ny = o.ny > 0 ? o.ny : o.nx;
    cfg.z_count = o.zcount;
    cfg.seed = o.seed;
    cfg.exec = o.serial ? Exec::serial : Exec::parallel;
    return cfg;
}

void apply_tol_overrides(SuiteConfig& cfg, const std::string& spec) {
    std::size_t pos = 0;
    while (pos < spec.size()) {
        std::size_t end = spec.find(',', pos);
        if (end == std::string::npos) end = spec.size();
        const std::string item = spec.substr(pos, end - pos);
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("bad tolerance override: " + item);
        const std::string name = item.substr(0, eq);
        const double val = std::stod(item.substr(eq + 1));
        if (name == "coarea") {
            cfg.tol_coarea_compact = val;
        } else if (name == "coarea_general") {
            cfg.tol_coarea_general = val;
        } else if (name == "bound") {
            cfg.tol_bound = val;
        } else {
            throw std::invalid_argument("unknown tolerance override: " + name);
        }
        pos = end + 1;
    }
}

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

int cmd_verify(const CommonOpts& o, const SuiteConfig& cfg) {
    const CatalogEntry entry = resolve(o);
    const VerificationReport rep = run_suite(entry, cfg);
    fs::create_directories(o.out);
    const fs::path out = fs::path(o.out) / "report.json";
    std::ofstream(out) << report_to_json(rep).dump(2) << "\n";
    for (const auto& c : rep.checks) {
        std::cout << (c.inconclusive ? "[----]" : (c.pass ? "[PASS]" : "[FAIL]")) << " " << c.name
                  << " lhs=" << fmt6(c.lhs) << " rhs=" << fmt6(c.rhs) << " ratio=" << fmt6(c.ratio);
        if (!c.notes.empty()) std::cout << "  (" << c.notes << ")";
        std::cout << "\n";
    }
    std::cout << (rep.pass ? "PASS" : "FAIL") << " " << rep.field_id << " -> " << out.string() << "\n";
    return rep.pass ? 0 : 1;
}

/// Nearest regular sampled z when the requested one is irregular.
std::optional<double> pick_regular_z(const LevelSetExtractor& ex, double z_req, int zcount) {
    if (std::abs(z_req) > 0 && ex.slice(z_req).regular) return z_req;
    const double lo = ex.min_fx2_in_domain(), hi = ex.max_fx2_in_domain();
    if (!(hi > lo)) return std::nullopt;
    const double dz = (hi - lo) / (zcount - 1);
    double best = 0;
    bool found = false;
    for (int i = 0; i < zcount; ++i) {
        const double z = lo + i * dz;
        if (std::abs(z) < 1e-12 * std::max(std::abs(lo), std::abs(hi))) continue;
        if (!ex.slice(z).regular) continue;
        if (!found || std::abs(z - z_req) < std::abs(best - z_req)) {
            best = z;
            found = true;
        }
    }
    if (found) return best;
    return std::nullopt;
}

int cmd_levelset(const CommonOpts& o, double z, Vec2 xstar, int parity, bool have_xstar) {
    const CatalogEntry entry = resolve(o);
    const Grid g = make_grid(entry.domain, o.nx, o.ny > 0 ? o.ny : o.nx);
    const LevelSetExtractor ex(entry.field, entry.domain, g,
                               o.serial ? Exec::serial : Exec::parallel);
    fs::create_directories(o.out);

    SvgOptions svg_opt;
    const auto zr = pick_regular_z(ex, z, o.zcount);
    double zz = z;
    if (zr && *zr != z) {
        zz = *zr;
        svg_opt.note = "requested z=" + fmt6(z) + " irregular; using nearest regular z=" + fmt6(zz);
        std::cout << svg_opt.note << "\n";
    }
    const LevelSlice slice = ex.slice(zz);
    if (slice.component_count() == 0) svg_opt.note = "empty slice at z=" + fmt6(zz);

    std::optional<Coloring> col;
    const Vec2 base = have_xstar ? xstar : entry.domain.midpoint();
    try {
        col.emplace(build_coloring_anchored(slice, entry.domain, g, base, parity));
    } catch (const std::exception& e) {
        std::cout << "coloring unavailable: " << e.what() << "\n";
    }
    const fs::path svg = fs::path(o.out) / ("slice_" + fmt6(zz) + ".svg");
    std::ofstream(svg) << render_slice_svg(slice, entry.domain, col ? &*col : nullptr, svg_opt);
    const fs::path js = fs::path(o.out) / ("slice_" + fmt6(zz) + ".json");
    std::ofstream(js) << slice_to_json(slice).dump(2) << "\n";
    std::cout << "wrote " << svg.string() << " and " << js.string() << "\n";
    return 0;
}

int cmd_path(const CommonOpts& o, double z, Vec2 xstar, int parity) {
    const CatalogEntry entry = resolve(o);
    const Grid g = make_grid(entry.domain, o.nx, o.ny > 0 ? o.ny : o.nx);
    const LevelSetExtractor ex(entry.field, entry.domain, g,
                               o.serial ? Exec::serial : Exec::parallel);
    fs::create_directories(o.out);

    SvgOptions svg_opt;
    const auto zr = pick_regular_z(ex, z, o.zcount);
    double zz = z;
    if (zr && *zr != z) {
        zz = *zr;
        svg_opt.note = "using nearest regular z=" + fmt6(zz);
    }
    const LevelSlice slice = ex.slice(zz);
    const double tol_x = 2.0 * g.spacing();

    int status = 0;
    std::optional<Coloring> col;
    PathBuildResult pr;
    try {
        col.emplace(build_coloring_anchored(slice, entry.domain, g, xstar, parity));
        pr = construct_path_boundary(slice, *col, xstar, entry.domain, tol_x);
    } catch (const std::exception& e) {
        pr.ok = false;
        pr.diagnostic = e.what();
    }
    const std::string ztag = fmt6(zz);
    if (pr.ok) {
        const PathReport rep = validate_path(pr.path, slice, *col, entry.domain, pr.path.end_point,
                                             1e-7 * entry.domain.diameter());
        std::cout << "path: " << pr.path.segments.size() << " segments, validation "
                  << (rep.ok ? "ok" : "FAILED") << "\n";
        for (const auto& vsn : rep.violations) std::cout << "  violation: " << vsn << "\n";
        std::ofstream(fs::path(o.out) / ("path_" + ztag + ".json")) << path_to_json(pr.path).dump(2) << "\n";
        std::ofstream(fs::path(o.out) / ("path_" + ztag + ".svg"))
            << render_path_svg(slice, entry.domain, col ? &*col : nullptr, pr.path, svg_opt);
        if (!rep.ok) status = 1;
    } else {
        svg_opt.note = "path construction failed: " + pr.diagnostic;
        std::cout << svg_opt.note << "\n";
        std::ofstream(fs::path(o.out) / ("path_" + ztag + ".svg"))
            << render_slice_svg(slice, entry.domain, col ? &*col : nullptr, svg_opt);
        status = 1;
    }
    return status;
}

int cmd_coarea(const CommonOpts& o, const SuiteConfig& cfg) {
    const CatalogEntry entry = resolve(o);
    const Grid g = make_grid(entry.domain, cfg.nx, cfg.ny);
    const LevelSetExtractor ex(entry.field, entry.domain, g, cfg.exec);
    const SweepResult sw = run_sweep(ex, cfg.z_count, cfg);
    const IntegralResult integ = integrate_abs_det_hessian(entry.field, entry.domain, g, cfg.exec);

    fs::create_directories(o.out);
    const fs::path csv = fs::path(o.out) / "coarea.csv";
    {
        std::ofstream out(csv);
        out << "z,tv,phi\n";
        for (const auto& s : sw.slices)
            out << fmt6(s.z) << "," << fmt6(s.tv) << "," << fmt6(s.phi) << "\n";
        out << "# total_tv_integral=" << fmt6(sw.tv_integral)
            << " abs_det_integral=" << fmt6(integ.value)
            << " phi_integral=" << fmt6(sw.phi_integral) << "\n";
    }
    const double rel = std::abs(integ.value - sw.tv_integral) /
                       std::max({std::abs(integ.value), std::abs(sw.tv_integral), 1e-12});
    std::cout << "abs-det integral: " << fmt6(integ.value) << "\n"
              << "tv z-integral:    " << fmt6(sw.tv_integral) << "\n"
              << "relative gap:     " << fmt6(rel) << "\n"
              << "wrote " << csv.string() << "\n";
    return 0;
}

int cmd_catalog() {
    for (const auto& e : catalog()) {
        std::cout << e.field.id << (e.field.compactly_supported ? "  [compact]" : "")
                  << "  domain=" << domain_to_json(e.domain).dump() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical verification of planar oscillation bounds via level-set analysis"};
    app.require_subcommand(1);

    CommonOpts o;
    double z = 0.05;
    std::vector<double> xstar_v;
    int parity = 0;

    auto* v = app.add_subcommand("verify", "run the full check suite and write report.json");
    add_common(v, o);
    int trials = 10;
    std::string tol_overrides;
    v->add_option("--trials", trials, "number of randomized path trials");
    v->add_option("--tol-overrides", tol_overrides,
                  "comma list of name=value: coarea, coarea_general, bound");

    auto* ls = app.add_subcommand("levelset", "extract one slice and render it as SVG");
    add_common(ls, o);
    ls->add_option("--z", z, "level value");
    ls->add_option("--xstar", xstar_v, "coloring base point x,y")->expected(2)->delimiter(',');
    ls->add_option("--parity", parity, "coloring parity index (0 or 1)");

    auto* pa = app.add_subcommand("path", "construct and render an admissible path");
    add_common(pa, o);
    pa->add_option("--z", z, "level value");
    pa->add_option("--xstar", xstar_v, "target point x,y")->expected(2)->delimiter(',');
    pa->add_option("--parity", parity, "coloring parity index (0 or 1)");

    auto* co = app.add_subcommand("coarea", "tabulate per-slice TV and phi against the area integral");
    add_common(co, o);

    app.add_subcommand("catalog", "list the builtin fields");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        SuiteConfig cfg = make_config(o);
        if (v->parsed()) {
            cfg.path_trials = trials;
            apply_tol_overrides(cfg, tol_overrides);
            return cmd_verify(o, cfg);
        }
        const Vec2 xs = xstar_v.size() == 2 ? Vec2{xstar_v[0], xstar_v[1]} : Vec2{};
        if (ls->parsed()) return cmd_levelset(o, z, xs, parity, xstar_v.size() == 2);
        if (pa->parsed()) {
            if (xstar_v.size() != 2) {
                std::cerr << "path: --xstar x,y is required\n";
                return 2;
            }
            return cmd_path(o, z, xs, parity);
        }
        if (co->parsed()) return cmd_coarea(o, cfg);
        return cmd_catalog();
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
