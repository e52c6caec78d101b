#include "abp/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace abp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct CellSegment {
    std::int64_t e1 = 0, e2 = 0;
    int cell = 0;
};

struct RawChain {
    std::vector<Vec2> pts;
    bool closed = false;
};

// Global edge ids: 2*node for the horizontal edge leaving node (i,j) to the
// right, 2*node+1 for the vertical edge leaving it upward.
std::int64_t hedge(int i, int j, int nx) { return 2 * (static_cast<std::int64_t>(j) * nx + i); }
std::int64_t vedge(int i, int j, int nx) { return 2 * (static_cast<std::int64_t>(j) * nx + i) + 1; }

double clip_to_circle(Vec2 a, Vec2 b, Vec2 c, double R) {
    // parameter t in [0,1] where segment a->b crosses the circle
    const Vec2 d = b - a, e = a - c;
    const double A = dot(d, d), B = dot(e, d), C = dot(e, e) - R * R;
    const double disc = std::max(0.0, B * B - A * C);
    const double sq = std::sqrt(disc);
    const double t1 = (-B - sq) / A, t2 = (-B + sq) / A;
    if (t1 >= 0.0 && t1 <= 1.0) return t1;
    return std::clamp(t2, 0.0, 1.0);
}

}  // namespace

LevelSetExtractor::LevelSetExtractor(const ScalarField& f, const Domain& K, const Grid& g, Exec exec)
    : field_(&f), domain_(K), grid_(g) {
    if (g.nx < 2 || g.ny < 2) throw std::invalid_argument("LevelSetExtractor: degenerate grid");
    if (g.domain.lo.x > K.lo.x + 1e-12 || g.domain.lo.y > K.lo.y + 1e-12 ||
        g.domain.hi.x < K.hi.x - 1e-12 || g.domain.hi.y < K.hi.y - 1e-12)
        throw std::invalid_argument("LevelSetExtractor: grid does not cover K");

    const int nx = g.nx, ny = g.ny;
    fx2_.assign(static_cast<std::size_t>(nx) * ny, 0.0);
    std::vector<double> row_min(ny, kInf), row_max(ny, -kInf), row_gfx2(ny, 0.0), row_gf(ny, 0.0);
    std::vector<double> row_minK(ny, kInf), row_maxK(ny, -kInf);

    auto sample_row = [&](int j) {
        double lo = kInf, hi = -kInf, loK = kInf, hiK = -kInf, gfx2 = 0.0, gf = 0.0;
        for (int i = 0; i < nx; ++i) {
            const Vec2 p = g.node(i, j);
            const Vec2 grad = f.gradient(p);
            const Mat2 h = f.hessian(p);
            const double v = grad.y;
            fx2_[static_cast<std::size_t>(j) * nx + i] = v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            if (K.contains(p)) {
                loK = std::min(loK, v);
                hiK = std::max(hiK, v);
            }
            gfx2 = std::max(gfx2, std::hypot(h.xy, h.yy));
            gf = std::max(gf, norm(grad));
        }
        row_min[j] = lo;
        row_max[j] = hi;
        row_minK[j] = loK;
        row_maxK[j] = hiK;
        row_gfx2[j] = gfx2;
        row_gf[j] = gf;
    };
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (int j = 0; j < ny; ++j) sample_row(j);
    } else {
        for (int j = 0; j < ny; ++j) sample_row(j);
    }
    fx2_min_ = kInf;
    fx2_max_ = -kInf;
    fx2_min_K_ = kInf;
    fx2_max_K_ = -kInf;
    for (int j = 0; j < ny; ++j) {
        fx2_min_ = std::min(fx2_min_, row_min[j]);
        fx2_max_ = std::max(fx2_max_, row_max[j]);
        fx2_min_K_ = std::min(fx2_min_K_, row_minK[j]);
        fx2_max_K_ = std::max(fx2_max_K_, row_maxK[j]);
        max_grad_fx2_ = std::max(max_grad_fx2_, row_gfx2[j]);
        max_grad_f_ = std::max(max_grad_f_, row_gf[j]);
    }

    const double scale = std::max({std::abs(fx2_min_), std::abs(fx2_max_), 1e-30});
    eps_snap_ = 1e-9 * scale;
    eps_reg_ = 1e-3 * max_grad_fx2_;

    const int ncx = nx - 1, ncy = ny - 1;
    cell_min_.assign(static_cast<std::size_t>(ncx) * ncy, 0.f);
    cell_max_.assign(static_cast<std::size_t>(ncx) * ncy, 0.f);
    for (int j = 0; j < ncy; ++j) {
        for (int i = 0; i < ncx; ++i) {
            const double* base = fx2_.data() + static_cast<std::size_t>(j) * nx + i;
            const double d00 = base[0], d10 = base[1], d01 = base[nx], d11 = base[nx + 1];
            const double lo = std::min(std::min(d00, d10), std::min(d01, d11));
            const double hi = std::max(std::max(d00, d10), std::max(d01, d11));
            cell_min_[static_cast<std::size_t>(j) * ncx + i] = std::nextafter(static_cast<float>(lo), -kInf);
            cell_max_[static_cast<std::size_t>(j) * ncx + i] = std::nextafter(static_cast<float>(hi), kInf);
        }
    }
}

LevelSlice LevelSetExtractor::slice(double z) const {
    LevelSlice out;
    out.z = z;

    const int nx = grid_.nx, ny = grid_.ny;
    const int ncx = nx - 1, ncy = ny - 1;
    const double eps = eps_snap_;

    std::unordered_set<std::int64_t> snapped;
    auto dval = [&](int i, int j) {
        const std::int64_t id = static_cast<std::int64_t>(j) * nx + i;
        double d = fx2_[id] - z;
        if (std::abs(d) < eps) {
            d = eps;
            snapped.insert(id);
        }
        return d;
    };

    std::vector<CellSegment> segs;
    std::unordered_map<std::int64_t, Vec2> edge_pt;
    auto cut_h = [&](int i, int j) {
        const std::int64_t e = hedge(i, j, nx);
        if (!edge_pt.count(e)) {
            const double a = dval(i, j), b = dval(i + 1, j);
            const double t = a / (a - b);
            const Vec2 n = grid_.node(i, j);
            edge_pt[e] = {n.x + t * grid_.hx, n.y};
        }
        return e;
    };
    auto cut_v = [&](int i, int j) {
        const std::int64_t e = vedge(i, j, nx);
        if (!edge_pt.count(e)) {
            const double a = dval(i, j), b = dval(i, j + 1);
            const double t = a / (a - b);
            const Vec2 n = grid_.node(i, j);
            edge_pt[e] = {n.x, n.y + t * grid_.hy};
        }
        return e;
    };

    for (int j = 0; j < ncy; ++j) {
        for (int i = 0; i < ncx; ++i) {
            const std::size_t cid = static_cast<std::size_t>(j) * ncx + i;
            if (cell_min_[cid] > z + eps || cell_max_[cid] < z - eps) continue;
            const double d00 = dval(i, j), d10 = dval(i + 1, j);
            const double d01 = dval(i, j + 1), d11 = dval(i + 1, j + 1);
            const int mask = (d00 > 0) | ((d10 > 0) << 1) | ((d11 > 0) << 2) | ((d01 > 0) << 3);
            if (mask == 0 || mask == 15) continue;

            const int cell = static_cast<int>(cid);
            auto emit = [&](std::int64_t a, std::int64_t b) { segs.push_back({a, b, cell}); };
            const auto B = [&] { return cut_h(i, j); };
            const auto T = [&] { return cut_h(i, j + 1); };
            const auto L = [&] { return cut_v(i, j); };
            const auto R = [&] { return cut_v(i + 1, j); };

            switch (mask) {
                case 1: case 14: emit(L(), B()); break;
                case 2: case 13: emit(B(), R()); break;
                case 4: case 11: emit(R(), T()); break;
                case 8: case 7: emit(T(), L()); break;
                case 3: case 12: emit(L(), R()); break;
                case 6: case 9: emit(B(), T()); break;
                case 5: case 10: {
                    // saddle: disambiguate with an analytic sample at the cell center
                    double c = field_->gradient(grid_.cell_center(i, j)).y - z;
                    if (std::abs(c) < eps) c = eps;
                    const bool plus_diag = (mask == 5) == (c > 0);
                    if (plus_diag) {
                        emit(B(), R());
                        emit(T(), L());
                    } else {
                        emit(L(), B());
                        emit(R(), T());
                    }
                    break;
                }
                default: break;
            }
        }
    }
    out.snapped_nodes = static_cast<int>(snapped.size());
    if (segs.empty()) {
        out.min_grad_fx2_on_curve = kInf;
        out.regular = true;
        return out;
    }

    // Chain cell segments into polylines via shared edges.
    std::unordered_map<std::int64_t, std::array<int, 2>> adj;
    adj.reserve(segs.size() * 2);
    for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
        for (const std::int64_t e : {segs[s].e1, segs[s].e2}) {
            auto [it, fresh] = adj.try_emplace(e, std::array<int, 2>{-1, -1});
            if (it->second[0] < 0) {
                it->second[0] = s;
            } else if (it->second[1] < 0) {
                it->second[1] = s;
            }
        }
    }

    std::vector<char> used(segs.size(), 0);
    std::vector<RawChain> chains;
    auto walk = [&](std::int64_t start_edge, int start_seg) {
        RawChain ch;
        ch.pts.push_back(edge_pt[start_edge]);
        std::int64_t e = start_edge;
        int s = start_seg;
        while (s >= 0 && !used[s]) {
            used[s] = 1;
            e = (segs[s].e1 == e) ? segs[s].e2 : segs[s].e1;
            ch.pts.push_back(edge_pt[e]);
            const auto& nb = adj[e];
            s = (nb[0] >= 0 && !used[nb[0]]) ? nb[0] : ((nb[1] >= 0 && !used[nb[1]]) ? nb[1] : -1);
        }
        return ch;
    };

    std::vector<std::int64_t> endpoints;
    for (const auto& [e, nb] : adj)
        if (nb[1] < 0) endpoints.push_back(e);
    std::sort(endpoints.begin(), endpoints.end());
    for (const std::int64_t e : endpoints) {
        const int s = adj[e][0];
        if (s < 0 || used[s]) continue;
        chains.push_back(walk(e, s));
    }
    for (int s = 0; s < static_cast<int>(segs.size()); ++s) {
        if (used[s]) continue;
        RawChain ch = walk(segs[s].e1, s);
        ch.closed = true;  // walk returned to the start edge
        chains.push_back(std::move(ch));
    }

    // Clip against the domain; closed chains that cross the boundary become arcs.
    const bool need_clip = domain_.shape == Domain::Shape::disk;
    std::vector<RawChain> pieces;
    auto clip_open = [&](const std::vector<Vec2>& pts) {
        RawChain cur;
        auto flush = [&] {
            if (cur.pts.size() >= 2) pieces.push_back(cur);
            cur.pts.clear();
        };
        bool prev_in = domain_.contains(pts[0]);
        if (prev_in) cur.pts.push_back(pts[0]);
        for (std::size_t k = 1; k < pts.size(); ++k) {
            const bool in = domain_.contains(pts[k]);
            if (prev_in && in) {
                cur.pts.push_back(pts[k]);
            } else if (prev_in && !in) {
                const double t = clip_to_circle(pts[k - 1], pts[k], domain_.center, domain_.radius);
                cur.pts.push_back(lerp(pts[k - 1], pts[k], t));
                flush();
            } else if (!prev_in && in) {
                const double t = clip_to_circle(pts[k - 1], pts[k], domain_.center, domain_.radius);
                cur.pts.push_back(lerp(pts[k - 1], pts[k], t));
                cur.pts.push_back(pts[k]);
            }
            prev_in = in;
        }
        flush();
    };
    for (auto& ch : chains) {
        if (!need_clip) {
            pieces.push_back(std::move(ch));
            continue;
        }
        bool all_in = true;
        for (const Vec2& p : ch.pts)
            if (!domain_.contains(p)) {
                all_in = false;
                break;
            }
        if (all_in) {
            pieces.push_back(std::move(ch));
            continue;
        }
        if (!ch.closed) {
            clip_open(ch.pts);
            continue;
        }
        // rotate the cycle to start at an outside vertex, then clip it open
        const int m = static_cast<int>(ch.pts.size()) - 1;  // unique vertices
        int r = 0;
        while (r < m && domain_.contains(ch.pts[r])) ++r;
        std::vector<Vec2> seq;
        seq.reserve(m + 1);
        for (int k = 0; k <= m; ++k) seq.push_back(ch.pts[(r + k) % m]);
        clip_open(seq);
    }

    // Classify pieces and attach analytic samples.
    const double eps_bdy = 1e-6 * domain_.diameter();
    const ScalarField& f = *field_;
    double slice_min_grad = kInf;
    std::vector<int> cut;
    for (auto& piece : pieces) {
        if (piece.pts.size() < 2) continue;
        CurveComponent c;
        c.vertices = std::move(piece.pts);
        c.closed = piece.closed;
        if (c.closed && dist(c.vertices.front(), c.vertices.back()) > 1e-12)
            c.vertices.push_back(c.vertices.front());
        if (!c.closed) {
            c.endpoints_on_boundary = domain_.boundary_distance(c.vertices.front()) <= eps_bdy &&
                                      domain_.boundary_distance(c.vertices.back()) <= eps_bdy;
        }
        const std::size_t n = c.vertices.size();
        c.arclengths.resize(n);
        c.samples_fx1.resize(n);
        c.samples_sz.resize(n);
        double mg = kInf;
        for (std::size_t k = 0; k < n; ++k) {
            const Vec2 p = c.vertices[k];
            c.arclengths[k] = k == 0 ? 0.0 : c.arclengths[k - 1] + dist(p, c.vertices[k - 1]);
            const Vec2 grad = f.gradient(p);
            const Mat2 h = f.hessian(p);
            c.samples_fx1[k] = grad.x;
            c.samples_sz[k] = f.value(p) - z * p.y;
            mg = std::min(mg, std::hypot(h.xy, h.yy));
        }
        c.min_grad_fx2 = mg;
        slice_min_grad = std::min(slice_min_grad, mg);

        for (std::size_t k = 0; k + 1 < n; ++k) {
            const Vec2 mid = lerp(c.vertices[k], c.vertices[k + 1], 0.5);
            const int ci = std::clamp(static_cast<int>((mid.x - grid_.domain.lo.x) / grid_.hx), 0, ncx - 1);
            const int cj = std::clamp(static_cast<int>((mid.y - grid_.domain.lo.y) / grid_.hy), 0, ncy - 1);
            cut.push_back(cj * ncx + ci);
        }

        if (c.closed) {
            out.loops.push_back(std::move(c));
        } else {
            out.arcs.push_back(std::move(c));
        }
    }
    std::sort(cut.begin(), cut.end());
    cut.erase(std::unique(cut.begin(), cut.end()), cut.end());
    out.cut_cells = std::move(cut);

    out.min_grad_fx2_on_curve = slice_min_grad;
    out.regular = slice_min_grad > eps_reg_;
    return out;
}

LevelSlice extract_level_set(const ScalarField& f, double z, const Domain& K, const Grid& g) {
    return LevelSetExtractor(f, K, g, Exec::serial).slice(z);
}

double total_variation_along(const CurveComponent& c) {
    if (c.samples_fx1.size() < 2) throw std::invalid_argument("total_variation_along: need >= 2 vertices");
    double tv = 0.0;
    for (std::size_t k = 0; k + 1 < c.samples_fx1.size(); ++k)
        tv += std::abs(c.samples_fx1[k + 1] - c.samples_fx1[k]);
    return tv;  // closed components carry the duplicated first vertex, so the wrap edge is included
}

double tv_of_slice(const LevelSlice& s) {
    double tv = 0.0;
    for (const auto& c : s.loops) tv += total_variation_along(c);
    for (const auto& c : s.arcs) tv += total_variation_along(c);
    return tv;
}

double projected_length(const CurveComponent& c) {
    std::vector<std::pair<double, double>> iv;
    iv.reserve(c.vertices.size());
    for (std::size_t k = 0; k + 1 < c.vertices.size(); ++k)
        iv.emplace_back(c.vertices[k].x, c.vertices[k + 1].x);
    return interval_union_length(std::move(iv));
}

double phi_compact(const LevelSlice& s, double tol_x) {
    if (!s.regular) throw std::invalid_argument("phi_compact: irregular slice");
    if (!s.arcs.empty())
        throw std::invalid_argument("phi_compact: slice has boundary arcs; use phi_general");
    double phi = 0.0;
    for (const auto& c : s.loops) phi += vertical_oscillation(c.vertices, c.samples_sz, tol_x);
    return phi;
}

std::vector<FoldingPoint> find_folding_points(const CurveComponent& c) {
    if (c.closed) throw std::invalid_argument("find_folding_points: component must be open");
    std::vector<FoldingPoint> folds;
    const auto& v = c.vertices;
    int last_sign = 0, last_idx = -1;
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
        const double dx = v[k + 1].x - v[k].x;
        if (dx == 0.0) continue;
        const int s = dx > 0 ? 1 : -1;
        if (last_sign != 0 && s != last_sign) folds.push_back({last_idx + 1, FoldingPoint::Kind::fold});
        last_sign = s;
        last_idx = static_cast<int>(k);
    }
    return folds;
}

int ghat(const CurveComponent& c, int i) {
    const auto& v = c.vertices;
    if (i < 0 || i >= static_cast<int>(v.size())) throw std::invalid_argument("ghat: index out of range");
    const double X = v[i].x;
    for (int k = 0; k < i; ++k) {
        const double a = v[k].x - X, b = v[k + 1].x - X;
        if (a == 0.0) {
            if (k > 0) return k;
            if (b == 0.0) return std::min(1, i);
            continue;  // touching the start point only: parameter 0 is excluded
        }
        if (b == 0.0) return k + 1;
        if (a * b < 0.0) {
            const double t = a / (a - b);
            return t <= 0.5 ? k : k + 1;
        }
    }
    return i;
}

int ghat_linear_scan(const CurveComponent& c, int i) { return ghat(c, i); }

std::vector<int> ghat_batch(const CurveComponent& c) {
    const auto& v = c.vertices;
    const int n = static_cast<int>(v.size());
    std::vector<int> res(n, 0);
    // Disjoint positive-length intervals of first-coordinate values already
    // swept, tagged with the first edge that covered them.
    std::map<double, std::pair<double, int>> cov;  // lo -> (hi, first edge)

    auto query = [&](int i) -> int {
        const double X = v[i].x;
        auto it = cov.upper_bound(X);
        if (it == cov.begin()) return i;
        --it;
        if (it->second.first < X) return i;
        const int e = it->second.second;
        const double a = v[e].x, b = v[e + 1].x;
        const double t = (X - a) / (b - a);
        const int idx = t <= 0.5 ? e : e + 1;
        if (idx == 0 && v[0].x == X) return ghat(c, i);  // parameter-0 touch
        return std::min(idx, i);
    };

    auto insert_edge = [&](int e) {
        double lo = v[e].x, hi = v[e + 1].x;
        if (lo > hi) std::swap(lo, hi);
        if (lo == hi) return;  // degenerate vertical edge: nothing to sweep
        double cur = lo;
        while (cur < hi) {
            auto it = cov.upper_bound(cur);
            if (it != cov.begin()) {
                auto pit = std::prev(it);
                if (pit->second.first > cur) {  // cur strictly inside an interval
                    cur = pit->second.first;
                    continue;
                }
            }
            auto nit = cov.upper_bound(cur);  // intervals start strictly after cur here
            const double gap_end = (nit == cov.end()) ? hi : std::min(hi, nit->first);
            if (gap_end > cur) cov[cur] = {gap_end, e};
            if (nit == cov.end() || nit->first >= hi) return;
            cur = nit->first;
        }
    };

    for (int i = 0; i < n; ++i) {
        res[i] = query(i);
        if (i + 1 < n) insert_edge(i);
    }
    return res;
}

int hhat(const CurveComponent& c, int i, const std::vector<FoldingPoint>& folds) {
    (void)c;
    int best = 0;
    for (const auto& fp : folds)
        if (fp.index < i) best = std::max(best, fp.index);
    return best;
}

double default_eps_zero(const LevelSlice& s) {
    double scale = 0.0;
    for (int cid = 0; cid < s.component_count(); ++cid)
        for (const double u : s.component(cid).samples_fx1) scale = std::max(scale, std::abs(u));
    return 1e-9 * std::max(scale, 1e-30);
}

std::vector<double> fx1_zero_params(const CurveComponent& c, double eps_zero) {
    std::vector<double> zs;
    const auto& u = c.samples_fx1;
    for (std::size_t k = 0; k < u.size(); ++k) {
        if (std::abs(u[k]) <= eps_zero) {
            zs.push_back(static_cast<double>(k));
            continue;
        }
        if (k + 1 < u.size() && u[k] * u[k + 1] < 0.0) zs.push_back(k + u[k] / (u[k] - u[k + 1]));
    }
    std::sort(zs.begin(), zs.end());
    return zs;
}

PhiBreakdown phi_general(const LevelSlice& s, double tol_x, double eps_zero) {
    if (!s.regular) throw std::invalid_argument("phi_general: irregular slice");
    PhiBreakdown out;
    for (const auto& c : s.loops) out.phi1 += vertical_oscillation(c.vertices, c.samples_sz, tol_x);

    for (const auto& c : s.arcs) {
        const auto zeros = fx1_zero_params(c, eps_zero);
        const int n = static_cast<int>(c.vertices.size());
        if (zeros.empty()) {
            // largest descending chain of (s_j, ghat(s_j)) pairs, exact at grid
            // resolution by dynamic programming
            const auto gh = ghat_batch(c);
            std::vector<double> dp(n, 0.0);
            for (int k = 1; k < n; ++k) {
                dp[k] = dp[k - 1];
                if (gh[k] < k)
                    dp[k] = std::max(dp[k], c.samples_sz[k] - c.samples_sz[gh[k]] + dp[gh[k]]);
            }
            out.phi2 += dp[n - 1];
        } else {
            int m = 0;
            for (int k = 1; k < n; ++k)
                if (c.samples_sz[k] > c.samples_sz[m]) m = k;
            const int q = zeros.front() <= static_cast<double>(m) ? 0 : n - 1;
            out.phi3 = std::max(out.phi3, c.samples_sz[m] - c.samples_sz[q]);
        }
    }
    return out;
}

}  // namespace abp
