#include "abp/svg.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace abp {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Mapper {
    double sx, sy, tx, ty;  // world -> pixel, y flipped
    double px(double x) const { return sx * x + tx; }
    double py(double y) const { return sy * y + ty; }
};

Mapper make_mapper(const Domain& K, double width_px, double height_px, double margin) {
    const double wx = K.hi.x - K.lo.x, wy = K.hi.y - K.lo.y;
    const double s = std::min((width_px - 2 * margin) / wx, (height_px - 2 * margin) / wy);
    Mapper m;
    m.sx = s;
    m.sy = -s;
    m.tx = margin - s * K.lo.x;
    m.ty = height_px - margin + s * K.lo.y;
    return m;
}

void polyline(std::ostringstream& os, const Mapper& m, const std::vector<Vec2>& pts,
              const std::string& style) {
    if (pts.size() < 2) return;
    os << "<path d=\"M";
    for (std::size_t k = 0; k < pts.size(); ++k) {
        os << (k ? " L" : " ") << fmt(m.px(pts[k].x)) << ' ' << fmt(m.py(pts[k].y));
    }
    os << "\" fill=\"none\" " << style << "/>\n";
}

void shade_coloring(std::ostringstream& os, const Mapper& m, const Coloring& col) {
    // row-wise run-length rectangles over cells colored -1
    const Grid& g = col.grid;
    const int ncx = g.cells_x(), ncy = g.cells_y();
    const int step = std::max(1, ncx / 160);  // cap the rectangle count
    for (int j = 0; j < ncy; j += step) {
        int run_start = -1;
        for (int i = 0; i <= ncx; i += step) {
            bool neg = false;
            if (i < ncx) {
                const std::int32_t lab = col.cell_label[static_cast<std::size_t>(j) * ncx + i];
                neg = lab >= 0 && col.component_color[lab] == -1;
            }
            if (neg && run_start < 0) run_start = i;
            if (!neg && run_start >= 0) {
                const Vec2 a = g.node(run_start, j);
                const Vec2 b = g.node(std::min(i, ncx), std::min(j + step, ncy));
                os << "<rect x=\"" << fmt(m.px(a.x)) << "\" y=\"" << fmt(m.py(b.y)) << "\" width=\""
                   << fmt(m.px(b.x) - m.px(a.x)) << "\" height=\"" << fmt(m.py(a.y) - m.py(b.y))
                   << "\" fill=\"#c9d4e8\" stroke=\"none\"/>\n";
                run_start = -1;
            }
        }
    }
}

void domain_outline(std::ostringstream& os, const Mapper& m, const Domain& K) {
    const std::string style = "stroke=\"#444444\" stroke-width=\"1.5\" stroke-dasharray=\"8 5\" fill=\"none\"";
    if (K.shape == Domain::Shape::disk) {
        os << "<circle cx=\"" << fmt(m.px(K.center.x)) << "\" cy=\"" << fmt(m.py(K.center.y))
           << "\" r=\"" << fmt(m.sx * K.radius) << "\" " << style << "/>\n";
    } else {
        os << "<rect x=\"" << fmt(m.px(K.lo.x)) << "\" y=\"" << fmt(m.py(K.hi.y)) << "\" width=\""
           << fmt(m.px(K.hi.x) - m.px(K.lo.x)) << "\" height=\"" << fmt(m.py(K.lo.y) - m.py(K.hi.y))
           << "\" " << style << "/>\n";
    }
}

std::string render(const LevelSlice& slice, const Domain& K, const Coloring* coloring,
                   const AdmissiblePath* path, const SvgOptions& opt) {
    const double W = opt.width_px, H = opt.width_px, margin = 30;
    const Mapper m = make_mapper(K, W, H, margin);
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(W) << "\" height=\"" << fmt(H)
       << "\" viewBox=\"0 0 " << fmt(W) << ' ' << fmt(H) << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (coloring) shade_coloring(os, m, *coloring);
    domain_outline(os, m, K);
    for (const auto& c : slice.loops)
        polyline(os, m, c.vertices, "stroke=\"#1a3a8f\" stroke-width=\"1.6\"");
    for (const auto& c : slice.arcs)
        polyline(os, m, c.vertices, "stroke=\"#106050\" stroke-width=\"1.6\"");

    if (path) {
        int wp = 0;
        auto label = [&](Vec2 p, const std::string& text) {
            os << "<circle cx=\"" << fmt(m.px(p.x)) << "\" cy=\"" << fmt(m.py(p.y))
               << "\" r=\"3\" fill=\"#b02020\"/>\n";
            os << "<text x=\"" << fmt(m.px(p.x) + 5) << "\" y=\"" << fmt(m.py(p.y) - 5)
               << "\" font-size=\"12\" fill=\"#b02020\">" << text << "</text>\n";
        };
        for (std::size_t j = 0; j < path->segments.size(); ++j) {
            const auto& s = path->segments[j];
            std::string style;
            switch (s.kind) {
                case SegmentKind::vert_down:
                case SegmentKind::vert_up:
                    style = "stroke=\"#b02020\" stroke-width=\"2\"";
                    break;
                case SegmentKind::loop_arc:
                    style = "stroke=\"#d07800\" stroke-width=\"2.4\"";
                    break;
                case SegmentKind::hhat_arc:
                case SegmentKind::ghat_arc:
                    style = "stroke=\"#7a00a0\" stroke-width=\"2.4\"";
                    break;
                case SegmentKind::boundary_arc:
                    style = "stroke=\"#0070c0\" stroke-width=\"2.4\"";
                    break;
            }
            std::vector<Vec2> pts;
            if (s.component_id >= 0 && s.vertex_a >= 0 && s.vertex_b >= 0) {
                const auto& c = slice.component(s.component_id);
                const int n = static_cast<int>(c.vertices.size());
                int a = s.vertex_a, b = s.vertex_b;
                if (c.closed) {
                    // walk the shorter way around the loop
                    const int mu = n - 1;
                    const int fwd = ((b - a) % mu + mu) % mu;
                    const int bwd = mu - fwd;
                    pts.push_back(s.start);
                    int idx = a;
                    const int steps = std::min(fwd, bwd);
                    const int dir = fwd <= bwd ? 1 : -1;
                    for (int k = 0; k < steps; ++k) {
                        idx = ((idx + dir) % mu + mu) % mu;
                        pts.push_back(c.vertices[idx]);
                    }
                    pts.push_back(s.end);
                } else {
                    pts.push_back(s.start);
                    const int dir = a <= b ? 1 : -1;
                    for (int idx = a; idx != b; idx += dir) pts.push_back(c.vertices[idx]);
                    pts.push_back(s.end);
                }
            } else {
                pts = {s.start, s.end};
            }
            polyline(os, m, pts, style);
            if (j == 0) {
                label(s.start, "q");
            } else {
                ++wp;
                label(s.start, "w" + std::to_string(wp));
            }
        }
        label(path->end_point, "x*");
    }
    if (!opt.note.empty())
        os << "<text x=\"10\" y=\"18\" font-size=\"13\" fill=\"#333333\">" << opt.note << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

}  // namespace

std::string render_slice_svg(const LevelSlice& slice, const Domain& K, const Coloring* coloring,
                             const SvgOptions& opt) {
    return render(slice, K, coloring, nullptr, opt);
}

std::string render_path_svg(const LevelSlice& slice, const Domain& K, const Coloring* coloring,
                            const AdmissiblePath& path, const SvgOptions& opt) {
    return render(slice, K, coloring, &path, opt);
}

}  // namespace abp
