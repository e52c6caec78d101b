#pragma once

#include <optional>
#include <span>
#include <vector>

#include "abp/field.hpp"
#include "abp/geometry.hpp"

namespace abp {

struct IntegralResult {
    double value = 0.0;
    int nx = 0, ny = 0;
    /// Value recomputed at half resolution, for convergence diagnostics.
    std::optional<double> richardson_estimate;
};

enum class Exec { serial, parallel };

/// Midpoint-rule integral of |det D^2 f| over K. Cells fully inside K get
/// full weight; straddling cells are weighted by the inside fraction of a
/// 4x4 sub-stencil. The parallel kernel accumulates per-row partials and
/// reduces them with a fixed-shape pairwise tree, so serial and parallel
/// results are bit-identical.
IntegralResult integrate_abs_det_hessian(const ScalarField& f, const Domain& K, const Grid& g,
                                         Exec exec = Exec::parallel, bool with_richardson = false);

/// max - min of f over the sample points. Throws on an empty set.
double oscillation(const ScalarField& f, std::span<const Vec2> points);

/// Oscillation over all grid nodes inside K.
double oscillation_over_grid(const ScalarField& f, const Domain& K, const Grid& g,
                             Exec exec = Exec::parallel);

/// Oscillation over n boundary samples of K.
double oscillation_over_boundary(const ScalarField& f, const Domain& K, int n);

/// Largest u(a) - u(b) over vertex pairs whose first coordinates differ by
/// at most tol_x. Vertices are bucketed on the first coordinate and pairs
/// are searched exactly within neighboring buckets. Returns 0 if no pair
/// qualifies.
double vertical_oscillation(std::span<const Vec2> points, std::span<const double> u, double tol_x);

/// |det(M)/c - det(A - b b^T / c)| for the 2x2 block A and pivot c = M[2][2].
/// The Schur identity predicts ~0. Throws std::domain_error if |c| <= 1e-12.
double schur_det_identity(const Mat3& M);

}  // namespace abp
