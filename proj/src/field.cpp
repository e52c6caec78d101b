#include "abp/field.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace abp {

Domain Domain::make_disk(Vec2 center, double radius) {
    if (!(radius > 0)) throw std::invalid_argument("disk radius must be positive");
    Domain d;
    d.shape = Shape::disk;
    d.center = center;
    d.radius = radius;
    d.lo = {center.x - radius, center.y - radius};
    d.hi = {center.x + radius, center.y + radius};
    return d;
}

Domain Domain::make_rect(Vec2 lo, Vec2 hi) {
    if (!(lo.x < hi.x && lo.y < hi.y)) throw std::invalid_argument("rect must have positive extent");
    Domain d;
    d.shape = Shape::rect;
    d.lo = lo;
    d.hi = hi;
    d.center = {0.5 * (lo.x + hi.x), 0.5 * (lo.y + hi.y)};
    return d;
}

bool Domain::contains(Vec2 p) const {
    if (shape == Shape::disk) return dist(p, center) <= radius;
    return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
}

double Domain::diameter() const {
    if (shape == Shape::disk) return 2.0 * radius;
    return dist(lo, hi);
}

Vec2 Domain::midpoint() const { return center; }

std::vector<Vec2> Domain::boundary_samples(int n) const {
    if (n <= 0) throw std::invalid_argument("boundary_samples: n must be positive");
    std::vector<Vec2> pts;
    pts.reserve(n);
    if (shape == Shape::disk) {
        for (int k = 0; k < n; ++k) {
            const double t = 2.0 * M_PI * k / n;
            pts.push_back({center.x + radius * std::cos(t), center.y + radius * std::sin(t)});
        }
        return pts;
    }
    const double w = hi.x - lo.x, h = hi.y - lo.y;
    const double per = 2.0 * (w + h);
    for (int k = 0; k < n; ++k) {
        double s = per * k / n;
        if (s < w) {
            pts.push_back({lo.x + s, lo.y});
        } else if ((s -= w) < h) {
            pts.push_back({hi.x, lo.y + s});
        } else if ((s -= h) < w) {
            pts.push_back({hi.x - s, hi.y});
        } else {
            pts.push_back({lo.x, lo.y + (s - w)});
        }
    }
    return pts;
}

double Domain::boundary_distance(Vec2 p) const {
    if (shape == Shape::disk) return std::abs(dist(p, center) - radius);
    if (contains(p)) {
        return std::min(std::min(p.x - lo.x, hi.x - p.x), std::min(p.y - lo.y, hi.y - p.y));
    }
    const double dx = std::max({lo.x - p.x, 0.0, p.x - hi.x});
    const double dy = std::max({lo.y - p.y, 0.0, p.y - hi.y});
    return std::hypot(dx, dy);
}

ScalarField make_bump(Vec2 center, double radius, double amplitude) {
    if (!(radius > 0)) throw std::invalid_argument("make_bump: radius must be positive");
    const double R2 = radius * radius;
    const double A = amplitude;
    auto u_of = [center, R2](Vec2 p) {
        const Vec2 d = p - center;
        return 1.0 - (d.x * d.x + d.y * d.y) / R2;
    };

    ScalarField f;
    f.id = "bump";
    f.compactly_supported = true;
    f.support = Domain::make_disk(center, radius);
    f.seams = {*f.support};
    f.value = [u_of, A](Vec2 p) {
        const double u = u_of(p);
        return u > 0 ? A * u * u * u : 0.0;
    };
    f.gradient = [u_of, center, R2, A](Vec2 p) -> Vec2 {
        const double u = u_of(p);
        if (u <= 0) return {0, 0};
        const double c = -6.0 * A * u * u / R2;
        const Vec2 d = p - center;
        return {c * d.x, c * d.y};
    };
    f.hessian = [u_of, center, R2, A](Vec2 p) -> Mat2 {
        const double u = u_of(p);
        if (u <= 0) return {};
        const Vec2 d = p - center;
        const double c = -6.0 * A / R2;
        const double q = 4.0 * u / R2;
        return {c * (u * u - q * d.x * d.x), c * (-q * d.x * d.y), c * (u * u - q * d.y * d.y)};
    };
    return f;
}

ScalarField make_modulated_bump(Vec2 center, double radius, double amplitude) {
    ScalarField base = make_bump(center, radius, amplitude);
    ScalarField f;
    f.id = "modulated_bump";
    f.compactly_supported = true;
    f.support = base.support;
    f.seams = base.seams;
    // frequency 6 makes the x2-derivative multimodal on the unit disk, so
    // its level sets split into several loops
    auto m_of = [](Vec2 p) { return 1.0 + 0.5 * std::sin(6 * p.x) * std::sin(6 * p.y); };
    auto dm_of = [](Vec2 p) -> Vec2 {
        return {3.0 * std::cos(6 * p.x) * std::sin(6 * p.y), 3.0 * std::sin(6 * p.x) * std::cos(6 * p.y)};
    };
    auto hm_of = [](Vec2 p) -> Mat2 {
        return {-18.0 * std::sin(6 * p.x) * std::sin(6 * p.y), 18.0 * std::cos(6 * p.x) * std::cos(6 * p.y),
                -18.0 * std::sin(6 * p.x) * std::sin(6 * p.y)};
    };
    f.value = [base, m_of](Vec2 p) { return base.value(p) * m_of(p); };
    f.gradient = [base, m_of, dm_of](Vec2 p) -> Vec2 {
        const double b = base.value(p), m = m_of(p);
        const Vec2 gb = base.gradient(p), gm = dm_of(p);
        return {gb.x * m + b * gm.x, gb.y * m + b * gm.y};
    };
    f.hessian = [base, m_of, dm_of, hm_of](Vec2 p) -> Mat2 {
        const double b = base.value(p), m = m_of(p);
        const Vec2 gb = base.gradient(p), gm = dm_of(p);
        const Mat2 hb = base.hessian(p), hm = hm_of(p);
        return {hb.xx * m + 2 * gb.x * gm.x + b * hm.xx,
                hb.xy * m + gb.x * gm.y + gb.y * gm.x + b * hm.xy,
                hb.yy * m + 2 * gb.y * gm.y + b * hm.yy};
    };
    return f;
}

ScalarField make_paper_figure_field() {
    // g = 0.3 x^3 - 0.6 y^2; f = 2 cos(g) - (y+4)(x^2+y-4)
    ScalarField f;
    f.id = "paper_figure";
    f.compactly_supported = false;
    f.value = [](Vec2 p) {
        const double g = 0.3 * p.x * p.x * p.x - 0.6 * p.y * p.y;
        return 2.0 * std::cos(g) - (p.y + 4.0) * (p.x * p.x + p.y - 4.0);
    };
    f.gradient = [](Vec2 p) -> Vec2 {
        const double g = 0.3 * p.x * p.x * p.x - 0.6 * p.y * p.y;
        const double gx = 0.9 * p.x * p.x, gy = -1.2 * p.y;
        const double s = std::sin(g);
        return {-2.0 * s * gx - 2.0 * p.x * (p.y + 4.0),
                -2.0 * s * gy - (p.x * p.x + p.y - 4.0) - (p.y + 4.0)};
    };
    f.hessian = [](Vec2 p) -> Mat2 {
        const double g = 0.3 * p.x * p.x * p.x - 0.6 * p.y * p.y;
        const double gx = 0.9 * p.x * p.x, gy = -1.2 * p.y;
        const double gxx = 1.8 * p.x, gyy = -1.2;
        const double s = std::sin(g), c = std::cos(g);
        return {-2.0 * (c * gx * gx + s * gxx) - 2.0 * (p.y + 4.0),
                -2.0 * c * gx * gy - 2.0 * p.x,
                -2.0 * (c * gy * gy + s * gyy) - 2.0};
    };
    return f;
}

ScalarField make_affine(double a, double b, double c) {
    ScalarField f;
    f.id = "affine";
    f.compactly_supported = false;
    f.value = [a, b, c](Vec2 p) { return a * p.x + b * p.y + c; };
    f.gradient = [a, b](Vec2) -> Vec2 { return {a, b}; };
    f.hessian = [](Vec2) -> Mat2 { return {}; };
    return f;
}

ScalarField make_zero() {
    ScalarField f;
    f.id = "zero";
    f.compactly_supported = true;
    f.support = Domain::make_disk({0, 0}, 1.0);
    f.value = [](Vec2) { return 0.0; };
    f.gradient = [](Vec2) -> Vec2 { return {0, 0}; };
    f.hessian = [](Vec2) -> Mat2 { return {}; };
    return f;
}

ScalarField make_sum(std::vector<ScalarField> terms, std::string id) {
    if (terms.empty()) throw std::invalid_argument("make_sum: need at least one term");
    ScalarField f;
    f.id = std::move(id);
    f.compactly_supported = true;
    for (const auto& t : terms) f.seams.insert(f.seams.end(), t.seams.begin(), t.seams.end());
    Vec2 lo{1e300, 1e300}, hi{-1e300, -1e300};
    for (const auto& t : terms) {
        if (!t.compactly_supported || !t.support) {
            f.compactly_supported = false;
            break;
        }
        lo.x = std::min(lo.x, t.support->lo.x);
        lo.y = std::min(lo.y, t.support->lo.y);
        hi.x = std::max(hi.x, t.support->hi.x);
        hi.y = std::max(hi.y, t.support->hi.y);
    }
    if (f.compactly_supported) f.support = Domain::make_rect(lo, hi);
    auto shared = std::make_shared<std::vector<ScalarField>>(std::move(terms));
    f.value = [shared](Vec2 p) {
        double s = 0;
        for (const auto& t : *shared) s += t.value(p);
        return s;
    };
    f.gradient = [shared](Vec2 p) -> Vec2 {
        Vec2 s{0, 0};
        for (const auto& t : *shared) s = s + t.gradient(p);
        return s;
    };
    f.hessian = [shared](Vec2 p) -> Mat2 {
        Mat2 s{};
        for (const auto& t : *shared) s = s + t.hessian(p);
        return s;
    };
    return f;
}

std::vector<CatalogEntry> catalog() {
    std::vector<CatalogEntry> out;
    out.push_back({make_bump({0, 0}, 1.0, 1.0), Domain::make_disk({0, 0}, 1.0)});
    out.push_back({make_modulated_bump({0, 0}, 1.0, 1.0), Domain::make_disk({0, 0}, 1.0)});
    {
        ScalarField two = make_sum({make_bump({-1.2, 0.0}, 0.7, 1.0), make_bump({1.2, 0.3}, 0.6, 0.8)},
                                   "two_bumps");
        out.push_back({std::move(two), Domain::make_rect({-2.2, -1.1}, {2.2, 1.3})});
    }
    out.push_back({make_paper_figure_field(), Domain::make_disk({2.54, -3.62}, 2.6)});
    out.push_back({make_affine(0.3, 0.7, -0.2), Domain::make_rect({-1, -1}, {1, 1})});
    out.push_back({make_zero(), Domain::make_rect({-1, -1}, {1, 1})});
    return out;
}

Grid make_grid(const Domain& domain, int nx, int ny) {
    if (nx < 2 || ny < 2) throw std::invalid_argument("make_grid: nx and ny must be >= 2");
    Grid g;
    g.domain = domain;
    g.nx = nx;
    g.ny = ny;
    g.hx = (domain.hi.x - domain.lo.x) / (nx - 1);
    g.hy = (domain.hi.y - domain.lo.y) / (ny - 1);
    return g;
}

}  // namespace abp
