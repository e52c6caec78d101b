#include "abp/quadrature.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace abp {

namespace {

double cell_inside_fraction(const Domain& K, const Grid& g, int i, int j) {
    int inside = 0;
    inside += K.contains(g.node(i, j));
    inside += K.contains(g.node(i + 1, j));
    inside += K.contains(g.node(i, j + 1));
    inside += K.contains(g.node(i + 1, j + 1));
    if (inside == 4) return 1.0;
    // Sub-sample straddling cells (and cells whose corners all fall outside,
    // which can still intersect a small disk).
    const Vec2 base = g.node(i, j);
    int hit = 0;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            hit += K.contains({base.x + (a + 0.5) * g.hx / 4.0, base.y + (b + 0.5) * g.hy / 4.0});
    return hit / 16.0;
}

double row_sum_abs_det(const ScalarField& f, const Domain& K, const Grid& g, int j) {
    double s = 0.0;
    for (int i = 0; i < g.cells_x(); ++i) {
        const double w = cell_inside_fraction(K, g, i, j);
        if (w == 0.0) continue;
        s += w * std::abs(f.hessian(g.cell_center(i, j)).det());
    }
    return s * g.hx * g.hy;
}

double integrate_value(const ScalarField& f, const Domain& K, const Grid& g, Exec exec) {
    std::vector<double> rows(g.cells_y(), 0.0);
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
        for (int j = 0; j < g.cells_y(); ++j) rows[j] = row_sum_abs_det(f, K, g, j);
    } else {
        for (int j = 0; j < g.cells_y(); ++j) rows[j] = row_sum_abs_det(f, K, g, j);
    }
    return pairwise_sum(rows);
}

}  // namespace

IntegralResult integrate_abs_det_hessian(const ScalarField& f, const Domain& K, const Grid& g,
                                         Exec exec, bool with_richardson) {
    if (g.nx < 2 || g.ny < 2) throw std::invalid_argument("integrate_abs_det_hessian: degenerate grid");
    if (g.domain.lo.x > K.lo.x + 1e-12 || g.domain.lo.y > K.lo.y + 1e-12 ||
        g.domain.hi.x < K.hi.x - 1e-12 || g.domain.hi.y < K.hi.y - 1e-12)
        throw std::invalid_argument("integrate_abs_det_hessian: grid does not cover K");

    IntegralResult r;
    r.nx = g.nx;
    r.ny = g.ny;
    r.value = integrate_value(f, K, g, exec);
    if (with_richardson && g.nx >= 4 && g.ny >= 4) {
        const Grid half = make_grid(g.domain, g.nx / 2, g.ny / 2);
        r.richardson_estimate = integrate_value(f, K, half, exec);
    }
    return r;
}

double oscillation(const ScalarField& f, std::span<const Vec2> points) {
    if (points.empty()) throw std::invalid_argument("oscillation: empty point set");
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const Vec2& p : points) {
        const double v = f.value(p);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return hi - lo;
}

double oscillation_over_grid(const ScalarField& f, const Domain& K, const Grid& g, Exec exec) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static) reduction(min : lo) reduction(max : hi)
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const Vec2 p = g.node(i, j);
                if (!K.contains(p)) continue;
                const double v = f.value(p);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    } else {
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const Vec2 p = g.node(i, j);
                if (!K.contains(p)) continue;
                const double v = f.value(p);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
    }
    if (!(lo <= hi)) throw std::invalid_argument("oscillation_over_grid: no grid node inside K");
    return hi - lo;
}

double oscillation_over_boundary(const ScalarField& f, const Domain& K, int n) {
    const auto pts = K.boundary_samples(n);
    return oscillation(f, pts);
}

double vertical_oscillation(std::span<const Vec2> points, std::span<const double> u, double tol_x) {
    if (points.size() != u.size()) throw std::invalid_argument("vertical_oscillation: size mismatch");
    if (points.size() < 2) return 0.0;
    if (!(tol_x > 0)) throw std::invalid_argument("vertical_oscillation: tol_x must be positive");

    std::unordered_map<long long, std::vector<int>> buckets;
    buckets.reserve(points.size());
    auto key_of = [tol_x](double x) { return static_cast<long long>(std::floor(x / tol_x)); };
    for (int i = 0; i < static_cast<int>(points.size()); ++i) buckets[key_of(points[i].x)].push_back(i);

    double best = 0.0;
    for (int i = 0; i < static_cast<int>(points.size()); ++i) {
        const long long k = key_of(points[i].x);
        for (long long kk = k - 1; kk <= k + 1; ++kk) {
            auto it = buckets.find(kk);
            if (it == buckets.end()) continue;
            for (int j : it->second) {
                if (j >= i) break;  // indices stored in increasing order
                if (std::abs(points[i].x - points[j].x) > tol_x) continue;
                best = std::max(best, std::abs(u[i] - u[j]));
            }
        }
    }
    return best;
}

double schur_det_identity(const Mat3& M) {
    const double c = M.m[2][2];
    if (std::abs(c) <= 1e-12) throw std::domain_error("schur_det_identity: near-singular pivot");
    const double b0 = M.m[0][2], b1 = M.m[1][2];
    const Mat2 schur{M.m[0][0] - b0 * b0 / c, M.m[0][1] - b0 * b1 / c, M.m[1][1] - b1 * b1 / c};
    return std::abs(M.det() / c - schur.det());
}

}  // namespace abp
