#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "abp/geometry.hpp"

namespace abp {

/// Compact region of the plane: a closed disk or an axis-aligned rectangle.
struct Domain {
    enum class Shape { disk, rect };

    Shape shape = Shape::rect;
    Vec2 center{};      // disk
    double radius = 0;  // disk
    Vec2 lo{}, hi{};    // rect (also the bounding box for disks)

    static Domain make_disk(Vec2 center, double radius);
    static Domain make_rect(Vec2 lo, Vec2 hi);

    bool contains(Vec2 p) const;
    double diameter() const;
    Vec2 midpoint() const;

    /// n points on the boundary curve, uniformly spaced in parameter.
    std::vector<Vec2> boundary_samples(int n) const;

    /// Unsigned distance from p to the boundary curve.
    double boundary_distance(Vec2 p) const;
};

/// Analytic C2 scalar field on the plane with exact derivative evaluators.
/// Evaluators are pure and safe to call concurrently.
struct ScalarField {
    std::string id;
    std::function<double(Vec2)> value;
    std::function<Vec2(Vec2)> gradient;
    std::function<Mat2(Vec2)> hessian;
    bool compactly_supported = false;
    std::optional<Domain> support;
    /// Boundaries across which the field is only C2 (each term's support
    /// circle for bump sums); finite-difference probes stay clear of them.
    std::vector<Domain> seams;
};

/// amplitude * (1 - |x-center|^2/radius^2)^3 inside the disk, 0 outside.
/// Every second-derivative term keeps a factor of (1 - r^2/R^2), so the
/// field is C2 across the support boundary.
ScalarField make_bump(Vec2 center, double radius, double amplitude);

/// Bump multiplied by 1 + 0.5*sin(3 x1)*sin(3 x2); same support, level sets
/// of the x2-derivative break into several loops.
ScalarField make_modulated_bump(Vec2 center, double radius, double amplitude);

/// f(x, y) = 2 cos(0.6 (0.5 x^3 - y^2)) - (y + 4)(x^2 + y - 4).
ScalarField make_paper_figure_field();

ScalarField make_affine(double a, double b, double c);
ScalarField make_zero();

/// Pointwise sum. Compactly supported iff every term is; the support is the
/// rectangular hull of the term supports.
ScalarField make_sum(std::vector<ScalarField> terms, std::string id = "sum");

struct CatalogEntry {
    ScalarField field;
    Domain domain;  // recommended evaluation domain
};

/// Built-in test fields, each with a recommended domain.
std::vector<CatalogEntry> catalog();

/// Regular sampling grid over the bounding box of a domain.
/// Nodes are at lo + (i*hx, j*hy); spacing = extent/(n-1).
struct Grid {
    Domain domain;
    int nx = 0, ny = 0;
    double hx = 0, hy = 0;

    Vec2 node(int i, int j) const {
        return {domain.lo.x + i * hx, domain.lo.y + j * hy};
    }
    Vec2 cell_center(int i, int j) const {
        return {domain.lo.x + (i + 0.5) * hx, domain.lo.y + (j + 0.5) * hy};
    }
    double spacing() const { return std::max(hx, hy); }
    int cells_x() const { return nx - 1; }
    int cells_y() const { return ny - 1; }
};

/// Throws std::invalid_argument if nx or ny < 2.
Grid make_grid(const Domain& domain, int nx, int ny);

}  // namespace abp
