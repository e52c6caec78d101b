#include "abp/topology.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace abp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::array<Vec2, 8> kJitterDirs = {{{1, 0},
                                          {-1, 0},
                                          {0, 1},
                                          {0, -1},
                                          {M_SQRT1_2, M_SQRT1_2},
                                          {-M_SQRT1_2, M_SQRT1_2},
                                          {M_SQRT1_2, -M_SQRT1_2},
                                          {-M_SQRT1_2, -M_SQRT1_2}}};

}  // namespace

int crossing_parity(const LevelSlice& sigma, Vec2 x0, Vec2 y, double eps_geom) {
    if (dist(x0, y) == 0.0) return 0;
    const double jit = 500.0 * eps_geom;

    for (int attempt = 0; attempt <= 8; ++attempt) {
        const Vec2 yy = attempt == 0 ? y : y + jit * kJitterDirs[attempt - 1];
        const Vec2 d = yy - x0;
        const double qlen = norm(d);
        bool degenerate = false;
        int count = 0;
        for (int cid = 0; cid < sigma.component_count() && !degenerate; ++cid) {
            const auto& v = sigma.component(cid).vertices;
            for (std::size_t k = 0; k + 1 < v.size(); ++k) {
                const Vec2 a = v[k], b = v[k + 1];
                const Vec2 e = b - a;
                const double tol = 1e-12 * std::max(norm(e) * qlen, 1e-30);
                const double o1 = cross(d, a - x0), o2 = cross(d, b - x0);
                const double o3 = cross(e, x0 - a), o4 = cross(e, yy - a);
                const bool s1 = (o1 > tol && o2 < -tol) || (o1 < -tol && o2 > tol);
                const bool s2 = (o3 > tol && o4 < -tol) || (o3 < -tol && o4 > tol);
                const bool z1 = std::abs(o1) <= tol || std::abs(o2) <= tol;
                const bool z2 = std::abs(o3) <= tol || std::abs(o4) <= tol;
                if (s1 && s2) {
                    ++count;
                } else if ((z1 && (s2 || z2)) || (z2 && s1)) {
                    degenerate = true;
                    break;
                }
            }
        }
        if (!degenerate) return count & 1;
    }
    throw DegenerateConfiguration("crossing_parity: all jitter retries tangential");
}

int Coloring::color_at(Vec2 p) const {
    const int ncx = grid.cells_x(), ncy = grid.cells_y();
    const int i = static_cast<int>(std::floor((p.x - grid.domain.lo.x) / grid.hx));
    const int j = static_cast<int>(std::floor((p.y - grid.domain.lo.y) / grid.hy));
    if (i < 0 || j < 0 || i >= ncx || j >= ncy) return 0;
    const std::int32_t lab = cell_label[static_cast<std::size_t>(j) * ncx + i];
    if (lab < 0) return 0;
    return component_color[lab];
}

int Coloring::color_probe(Vec2 p, Vec2 dir, double step) const {
    for (const double m : {1.0, 0.5, 2.0, 4.0}) {
        const int c = color_at(p + (m * step) * dir);
        if (c != 0) return c;
    }
    return 0;
}

Coloring build_coloring(const LevelSlice& sigma, const Domain& K, const Grid& g, Vec2 base_point,
                        int parity_index) {
    if (parity_index != 0 && parity_index != 1)
        throw std::invalid_argument("build_coloring: parity_index must be 0 or 1");
    Coloring col;
    col.base_point = base_point;
    col.parity_index = parity_index;
    col.grid = g;
    col.domain = K;

    const int ncx = g.cells_x(), ncy = g.cells_y();
    col.cell_label.assign(static_cast<std::size_t>(ncx) * ncy, 0);
    for (int j = 0; j < ncy; ++j)
        for (int i = 0; i < ncx; ++i)
            if (!K.contains(g.cell_center(i, j))) col.cell_label[static_cast<std::size_t>(j) * ncx + i] = -2;
    for (const int c : sigma.cut_cells) col.cell_label[c] = -1;

    {
        const int bi = static_cast<int>(std::floor((base_point.x - g.domain.lo.x) / g.hx));
        const int bj = static_cast<int>(std::floor((base_point.y - g.domain.lo.y) / g.hy));
        if (bi < 0 || bj < 0 || bi >= ncx || bj >= ncy ||
            col.cell_label[static_cast<std::size_t>(bj) * ncx + bi] != 0)
            throw std::invalid_argument("build_coloring: base point lies in a boundary cell");
    }

    // flood fill the uncut in-domain cells into connected components
    std::vector<Vec2> reps;
    std::deque<int> queue;
    int next_label = 0;
    for (int j = 0; j < ncy; ++j) {
        for (int i = 0; i < ncx; ++i) {
            const std::size_t id0 = static_cast<std::size_t>(j) * ncx + i;
            if (col.cell_label[id0] != 0) continue;
            const std::int32_t lab = next_label++;
            reps.push_back(g.cell_center(i, j));
            col.cell_label[id0] = lab + 1;  // temporary shift so 0 stays "unvisited"
            queue.push_back(static_cast<int>(id0));
            while (!queue.empty()) {
                const int c = queue.front();
                queue.pop_front();
                const int ci = c % ncx, cj = c / ncx;
                const std::array<std::array<int, 2>, 4> nb = {{{ci - 1, cj}, {ci + 1, cj}, {ci, cj - 1}, {ci, cj + 1}}};
                for (const auto& [ni, nj] : nb) {
                    if (ni < 0 || nj < 0 || ni >= ncx || nj >= ncy) continue;
                    const std::size_t nid = static_cast<std::size_t>(nj) * ncx + ni;
                    if (col.cell_label[nid] != 0) continue;
                    col.cell_label[nid] = lab + 1;
                    queue.push_back(static_cast<int>(nid));
                }
            }
        }
    }
    for (auto& lab : col.cell_label)
        if (lab > 0) --lab;  // undo the shift
    col.components = next_label;

    const double eps_geom = 1e-7 * K.diameter();
    col.component_color.resize(next_label);
    for (int c = 0; c < next_label; ++c) {
        const int parity = crossing_parity(sigma, base_point, reps[c], eps_geom);
        int color = parity == 0 ? 1 : -1;
        if (parity_index == 1) color = -color;
        col.component_color[c] = static_cast<std::int8_t>(color);
    }
    return col;
}

Coloring build_coloring_anchored(const LevelSlice& sigma, const Domain& K, const Grid& g,
                                 Vec2 base_point, int parity_index) {
    try {
        return build_coloring(sigma, K, g, base_point, parity_index);
    } catch (const std::invalid_argument&) {
    }
    // ring search for the nearest usable cell center
    const int ncx = g.cells_x(), ncy = g.cells_y();
    const int bi = std::clamp(static_cast<int>(std::floor((base_point.x - g.domain.lo.x) / g.hx)), 0, ncx - 1);
    const int bj = std::clamp(static_cast<int>(std::floor((base_point.y - g.domain.lo.y) / g.hy)), 0, ncy - 1);
    for (int r = 1; r < std::max(ncx, ncy); ++r) {
        for (int dj = -r; dj <= r; ++dj) {
            for (int di = -r; di <= r; ++di) {
                if (std::max(std::abs(di), std::abs(dj)) != r) continue;
                const int i = bi + di, j = bj + dj;
                if (i < 0 || j < 0 || i >= ncx || j >= ncy) continue;
                try {
                    return build_coloring(sigma, K, g, g.cell_center(i, j), parity_index);
                } catch (const std::invalid_argument&) {
                }
            }
        }
    }
    throw std::invalid_argument("build_coloring_anchored: no labeled cell near the base point");
}

LoopSign classify_loop_sign(const CurveComponent& loop, const Coloring& col) {
    if (!loop.closed) throw std::invalid_argument("classify_loop_sign: component must be closed");
    const auto& v = loop.vertices;
    const std::size_t m = v.size() - 1;  // unique vertices
    double area2 = 0.0;
    for (std::size_t k = 0; k < m; ++k) area2 += cross(v[k], v[k + 1]);
    const double orient = area2 >= 0 ? 1.0 : -1.0;  // ccw: outward is the right normal

    const double step = 1.5 * col.grid.spacing();
    const std::size_t stride = std::max<std::size_t>(1, m / 16);
    int vote = 0;
    for (std::size_t k = 0; k < m; k += stride) {
        const Vec2 a = v[k], b = v[k + 1];
        const Vec2 e = b - a;
        const double len = norm(e);
        if (len <= 0) continue;
        const Vec2 n = (orient / len) * Vec2{e.y, -e.x};
        const Vec2 mid = lerp(a, b, 0.5);
        const int outer = col.color_probe(mid, n, step);
        const int inner = col.color_probe(mid, {-n.x, -n.y}, step);
        if (outer == 0 || inner == 0 || outer == inner) continue;
        const int s = outer == 1 ? 1 : -1;
        if (vote == 0) {
            vote = s;
        } else if (vote != s) {
            throw DegenerateConfiguration("classify_loop_sign: inconsistent side colors");
        }
    }
    if (vote == 0) throw DegenerateConfiguration("classify_loop_sign: no usable side samples");
    return vote > 0 ? LoopSign::c_positive : LoopSign::c_negative;
}

namespace {

/// Extremal loop vertex on the fiber through p (|dx| <= tol_x): highest at
/// or above p for c-positive, lowest at or below for c-negative.
int extremal_fiber_vertex_at(const CurveComponent& loop, Vec2 p, LoopSign sign, double tol_x) {
    const auto& v = loop.vertices;
    const std::size_t m = loop.closed ? v.size() - 1 : v.size();
    int best = -1;
    for (std::size_t k = 0; k < m; ++k) {
        if (std::abs(v[k].x - p.x) > tol_x) continue;
        if (sign == LoopSign::c_positive) {
            if (v[k].y < p.y) continue;
            if (best < 0 || v[k].y > v[best].y) best = static_cast<int>(k);
        } else {
            if (v[k].y > p.y) continue;
            if (best < 0 || v[k].y < v[best].y) best = static_cast<int>(k);
        }
    }
    return best;
}

}  // namespace

int loop_extremal_fiber_vertex(const CurveComponent& loop, int i, LoopSign sign, double tol_x,
                               bool* fell_back) {
    if (i < 0 || i >= static_cast<int>(loop.vertices.size()))
        throw std::invalid_argument("loop_extremal_fiber_vertex: index out of range");
    const int best = extremal_fiber_vertex_at(loop, loop.vertices[i], sign, tol_x);
    if (fell_back) *fell_back = best < 0 || best == i;
    return best < 0 ? i : best;
}

namespace {

struct VerticalHit {
    bool found = false;
    bool boundary = false;
    Vec2 point{};
    int comp = -1;
    int vertex = -1;  // nearest polyline vertex at the hit
    double y = 0.0;
};

struct Exclusion {
    int comp = -1;
    Vec2 pt{};
    double r = 0.0;
};

VerticalHit first_vertical_hit(const LevelSlice& sigma, const Domain& K, Vec2 from, int dir,
                               const Exclusion& excl, double eps_y) {
    const double X = from.x;
    VerticalHit best;
    best.y = dir > 0 ? kInf : -kInf;

    auto consider = [&](Vec2 pt, int comp, int vertex) {
        if (dir > 0 ? pt.y <= from.y + eps_y : pt.y >= from.y - eps_y) return;
        if (comp == excl.comp && dist(pt, excl.pt) < excl.r) return;
        const bool better = dir > 0 ? pt.y < best.y : pt.y > best.y;
        if (better) {
            best.found = true;
            best.point = pt;
            best.comp = comp;
            best.vertex = vertex;
            best.y = pt.y;
        }
    };

    for (int cid = 0; cid < sigma.component_count(); ++cid) {
        const auto& c = sigma.component(cid);
        const auto& v = c.vertices;
        const std::size_t m = c.closed ? v.size() - 1 : v.size();
        for (std::size_t k = 0; k + 1 < v.size(); ++k) {
            const double a = v[k].x - X, b = v[k + 1].x - X;
            if (a == 0.0 || b == 0.0) continue;  // vertex events handled below
            if (a * b < 0.0) {
                const double t = a / (a - b);
                const Vec2 pt = lerp(v[k], v[k + 1], t);
                consider(pt, cid, t <= 0.5 ? static_cast<int>(k) : static_cast<int>(k + 1));
            }
        }
        // transversal passes exactly through a vertex
        for (std::size_t k = 0; k < m; ++k) {
            if (v[k].x != X) continue;
            auto side = [&](int off) -> int {
                std::size_t idx = k;
                for (std::size_t steps = 0; steps < m; ++steps) {
                    if (c.closed) {
                        idx = (idx + m + off) % m;
                    } else {
                        if ((off < 0 && idx == 0) || (off > 0 && idx + 1 >= v.size())) return 0;
                        idx += off;
                    }
                    const double dx = v[idx].x - X;
                    if (dx != 0.0) return dx > 0 ? 1 : -1;
                }
                return 0;
            };
            const int sl = side(-1), sr = side(+1);
            if (sl * sr < 0) consider(v[k], cid, static_cast<int>(k));
        }
    }

    double y_exit;
    if (K.shape == Domain::Shape::disk) {
        const double dx = X - K.center.x;
        const double dy = std::sqrt(std::max(0.0, K.radius * K.radius - dx * dx));
        y_exit = K.center.y + (dir > 0 ? dy : -dy);
    } else {
        y_exit = dir > 0 ? K.hi.y : K.lo.y;
    }
    const bool curve_inside_exit = best.found && (dir > 0 ? best.y < y_exit - eps_y : best.y > y_exit + eps_y);
    if (!curve_inside_exit) {
        best.found = true;
        best.boundary = true;
        best.point = {X, y_exit};
        best.comp = -1;
        best.vertex = -1;
        best.y = y_exit;
    }
    return best;
}

PathBuildResult build_path(const LevelSlice& sigma, const Coloring& col, Vec2 xstar, const Domain& K,
                           double tol_x, bool arcs_allowed) {
    PathBuildResult res;
    const double h = col.grid.spacing();
    const double diam = K.diameter();
    const double eps_y = 1e-9 * diam;
    const double eps_bdy = 1e-6 * diam;
    const double eps_zero = default_eps_zero(sigma);
    const int guard = 10 * (sigma.component_count() + 1) + 4;

    std::vector<int> loop_sign_cache(sigma.component_count(), 2);  // 2 = unknown
    auto loop_sign = [&](int cid) {
        if (loop_sign_cache[cid] == 2) {
            const LoopSign s = classify_loop_sign(sigma.component(cid), col);
            loop_sign_cache[cid] = s == LoopSign::c_positive ? 1 : -1;
        }
        return loop_sign_cache[cid] == 1 ? LoopSign::c_positive : LoopSign::c_negative;
    };

    std::string last_fail;
    for (int attempt = 0; attempt <= 8; ++attempt) {
        res.jitter_attempts = attempt;
        const Vec2 xs = attempt == 0 ? xstar : xstar + (0.35 * h * attempt) * kJitterDirs[(attempt - 1) % 8];
        if (!K.contains(xs)) continue;
        int color = col.color_at(xs);
        if (color == 0) {
            last_fail = "base point in an unlabeled cell";
            continue;
        }

        std::vector<PathSegment> segs;
        Exclusion excl;
        Vec2 cur = xs;
        bool done = false, failed = false;
        int case5 = 0, case6 = 0;
        std::string fail_reason;

        while (!done && !failed) {
            if (static_cast<int>(segs.size()) > guard) {
                res.diagnostic = "termination guard exceeded";
                std::ostringstream os;
                os << "termination guard exceeded after " << segs.size() << " segments";
                throw ConstructionFailure(os.str());
            }
            const int dir = color > 0 ? 1 : -1;
            const VerticalHit hit = first_vertical_hit(sigma, K, cur, dir, excl, eps_y);
            segs.push_back({dir > 0 ? SegmentKind::vert_down : SegmentKind::vert_up, hit.point, cur, -1, -1, -1});
            if (hit.boundary) {
                done = true;
                break;
            }
            const CurveComponent& comp = sigma.component(hit.comp);
            const int n = static_cast<int>(comp.vertices.size());
            if (sigma.is_loop(hit.comp)) {
                const LoopSign sign = loop_sign(hit.comp);
                const int gi = extremal_fiber_vertex_at(comp, hit.point, sign, tol_x);
                if (gi < 0 || dist(comp.vertices[gi], hit.point) <= eps_y) {
                    failed = true;
                    fail_reason = "vertical tangency at loop fiber";
                    break;
                }
                segs.push_back({SegmentKind::loop_arc, comp.vertices[gi], hit.point, hit.comp, gi, hit.vertex});
                cur = comp.vertices[gi];
                color = sign == LoopSign::c_positive ? 1 : -1;
                excl = {hit.comp, cur, 2.0 * h};
            } else {
                if (!arcs_allowed) {
                    failed = true;
                    fail_reason = "boundary arc reached in loops-only construction";
                    break;
                }
                const auto zeros = fx1_zero_params(comp, eps_zero);
                const double hp = hit.vertex;  // parameter of the hit, at vertex resolution
                if (!zeros.empty()) {
                    int m = 0;
                    for (int k = 1; k < n; ++k)
                        if (comp.samples_sz[k] > comp.samples_sz[m]) m = k;
                    int qi = zeros.front() <= static_cast<double>(m) ? 0 : n - 1;
                    const bool zero_between = qi == 0 ? zeros.front() <= hp : zeros.back() >= hp;
                    if (!zero_between) qi = qi == 0 ? n - 1 : 0;
                    segs.push_back({SegmentKind::boundary_arc, comp.vertices[qi], hit.point, hit.comp, qi, hit.vertex});
                    ++case5;
                    done = true;
                    break;
                }
                // f_x1 keeps one sign on this arc: walk to the previous fold (or
                // the boundary) against that sign
                ++case6;
                int mabs = 0;
                for (int k = 1; k < n; ++k)
                    if (std::abs(comp.samples_fx1[k]) > std::abs(comp.samples_fx1[mabs])) mabs = k;
                const double sF = comp.samples_fx1[mabs] > 0 ? 1.0 : -1.0;
                const auto folds = find_folding_points(comp);
                int fl = 0, fr = n - 1;
                for (const auto& fp : folds) {
                    if (fp.index < hp) fl = std::max(fl, fp.index);
                    if (fp.index > hp) fr = std::min(fr, fp.index);
                }
                const double val_l = sF * (hit.point.x - comp.vertices[fl].x);
                const double val_r = sF * (hit.point.x - comp.vertices[fr].x);
                const int ti = val_l <= val_r ? (val_l <= 0 ? fl : fr) : (val_r <= 0 ? fr : fl);
                segs.push_back({SegmentKind::hhat_arc, comp.vertices[ti], hit.point, hit.comp, ti, hit.vertex});
                cur = comp.vertices[ti];
                if (ti == 0 || ti == n - 1) {
                    if (K.boundary_distance(cur) > eps_bdy) {
                        failed = true;
                        fail_reason = "arc endpoint not on the domain boundary";
                        break;
                    }
                    done = true;
                    break;
                }
                const int cu = col.color_probe(cur, {0, 1}, h);
                const int cd = col.color_probe(cur, {0, -1}, h);
                if (cu == 1) {
                    color = 1;
                } else if (cd == -1) {
                    color = -1;
                } else {
                    failed = true;
                    fail_reason = "no admissible vertical direction at fold";
                    break;
                }
                excl = {hit.comp, cur, 2.0 * h};
            }
        }
        if (failed) {
            last_fail = fail_reason;
            continue;
        }
        std::reverse(segs.begin(), segs.end());
        res.ok = true;
        res.path.segments = std::move(segs);
        res.path.start_point = res.path.segments.front().start;
        res.path.end_point = xs;
        res.case5_fired = case5;
        res.case6_fired = case6;
        return res;
    }
    res.ok = false;
    res.diagnostic = last_fail.empty() ? "construction failed" : last_fail;
    return res;
}

double dist_to_component(Vec2 p, const CurveComponent& c) {
    double best = kInf;
    for (std::size_t k = 0; k + 1 < c.vertices.size(); ++k)
        best = std::min(best, point_segment_distance(p, c.vertices[k], c.vertices[k + 1]));
    return best;
}

}  // namespace

PathBuildResult construct_path_compact(const LevelSlice& sigma, const Coloring& col, Vec2 xstar,
                                       const Domain& K, double tol_x) {
    return build_path(sigma, col, xstar, K, tol_x, /*arcs_allowed=*/false);
}

PathBuildResult construct_path_boundary(const LevelSlice& sigma, const Coloring& col, Vec2 xstar,
                                        const Domain& K, double tol_x) {
    return build_path(sigma, col, xstar, K, tol_x, /*arcs_allowed=*/true);
}

PathReport validate_path(const AdmissiblePath& p, const LevelSlice& sigma, const Coloring& col,
                         const Domain& K, Vec2 xstar, double eps_geom) {
    PathReport rep;
    auto flag = [&rep](const std::string& s) {
        rep.ok = false;
        rep.violations.push_back(s);
    };
    if (p.segments.empty()) {
        flag("empty path");
        return rep;
    }
    for (std::size_t j = 0; j + 1 < p.segments.size(); ++j)
        if (dist(p.segments[j].end, p.segments[j + 1].start) > eps_geom)
            flag("segment chaining broken at " + std::to_string(j));

    if (K.boundary_distance(p.segments.front().start) > std::max(eps_geom, 1e-6 * K.diameter()))
        flag("path does not start on the domain boundary");
    if (dist(p.segments.back().end, xstar) > eps_geom) flag("path does not end at the target point");

    // no component may be revisited after the path leaves it: arc segments
    // count as one visit unless they directly continue the previous arc
    std::vector<int> visits;
    for (std::size_t j = 0; j < p.segments.size(); ++j) {
        const auto& s = p.segments[j];
        if (s.component_id < 0) continue;
        const bool continues = j > 0 && p.segments[j - 1].component_id == s.component_id;
        if (!continues) visits.push_back(s.component_id);
    }
    {
        std::vector<int> sorted = visits;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            flag("component revisited");
    }

    for (std::size_t j = 0; j < p.segments.size(); ++j) {
        const auto& s = p.segments[j];
        const std::string tag = " (segment " + std::to_string(j) + ")";
        switch (s.kind) {
            case SegmentKind::vert_down:
            case SegmentKind::vert_up: {
                const bool down = s.kind == SegmentKind::vert_down;
                if (std::abs(s.start.x - s.end.x) > eps_geom) flag("vertical segment not vertical" + tag);
                if (down ? s.end.y > s.start.y + eps_geom : s.end.y < s.start.y - eps_geom)
                    flag("vertical segment direction mismatch" + tag);
                const int want = down ? 1 : -1;
                for (int k = 0; k < 32; ++k) {
                    const Vec2 q = lerp(s.start, s.end, (k + 0.5) / 32.0);
                    const int c = col.color_at(q);
                    if (c != 0 && c != want) {
                        flag("vertical segment crosses the wrong color" + tag);
                        break;
                    }
                }
                break;
            }
            case SegmentKind::loop_arc:
            case SegmentKind::ghat_arc:
            case SegmentKind::hhat_arc:
            case SegmentKind::boundary_arc: {
                if (s.component_id < 0 || s.component_id >= sigma.component_count()) {
                    flag("arc segment without a component" + tag);
                    break;
                }
                const auto& c = sigma.component(s.component_id);
                const double tol = std::max(eps_geom, 1e-9);
                if (dist_to_component(s.start, c) > tol) flag("arc start off its component" + tag);
                if (dist_to_component(s.end, c) > tol) flag("arc end off its component" + tag);
                if (s.kind == SegmentKind::loop_arc && !c.closed) flag("loop arc on an open component" + tag);
                if (s.kind != SegmentKind::loop_arc && c.closed) flag("arc jump on a closed component" + tag);
                if (s.kind == SegmentKind::boundary_arc &&
                    K.boundary_distance(s.start) > std::max(eps_geom, 1e-6 * K.diameter()))
                    flag("boundary arc does not start on the domain boundary" + tag);
                break;
            }
        }
    }
    return rep;
}

}  // namespace abp
