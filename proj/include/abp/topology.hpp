#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "abp/field.hpp"
#include "abp/geometry.hpp"
#include "abp/levelset.hpp"

namespace abp {

struct DegenerateConfiguration : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConstructionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parity of the number of transversal crossings between the straight
/// segment x0 -> y and the slice curves. Near-vertex and tangential hits
/// retry with a deterministic jitter of y; throws DegenerateConfiguration
/// if every retry stays degenerate.
int crossing_parity(const LevelSlice& sigma, Vec2 x0, Vec2 y, double eps_geom);

/// Binary +-1 coloring of the grid cells of K \ Sigma. Cells crossed by a
/// curve stay unlabeled; each connected component gets the crossing parity
/// of its representative cell relative to the base point, flipped when
/// parity_index == 1.
struct Coloring {
    Vec2 base_point{};
    int parity_index = 0;
    Grid grid;
    Domain domain;
    std::vector<std::int32_t> cell_label;  // -1 cut, -2 outside K
    std::vector<std::int8_t> component_color;
    int components = 0;

    /// +1 / -1, or 0 for cut cells, points outside K, or out of range.
    int color_at(Vec2 p) const;

    /// color_at with fallback probes marching away from p in direction dir
    /// (used to read the color just off a curve).
    int color_probe(Vec2 p, Vec2 dir, double step) const;
};

Coloring build_coloring(const LevelSlice& sigma, const Domain& K, const Grid& g, Vec2 base_point,
                        int parity_index);

/// build_coloring that tolerates a base point inside a cut cell by
/// anchoring at the nearest labeled cell center instead.
Coloring build_coloring_anchored(const LevelSlice& sigma, const Domain& K, const Grid& g,
                                 Vec2 base_point, int parity_index);

enum class LoopSign { c_positive, c_negative };

/// Classifies a loop by sampling colors on both sides of its outward
/// normal (toward the unbounded complement component). Throws
/// DegenerateConfiguration when the samples disagree or none land in
/// labeled cells.
LoopSign classify_loop_sign(const CurveComponent& loop, const Coloring& col);

/// Extremal same-fiber vertex: the highest loop vertex above vertex i
/// within |dx| <= tol_x for c-positive loops, the lowest below for
/// c-negative. Falls back to i itself when no candidate exists (vertical
/// tangency); *fell_back reports that.
int loop_extremal_fiber_vertex(const CurveComponent& loop, int i, LoopSign sign, double tol_x,
                               bool* fell_back = nullptr);

enum class SegmentKind { vert_down, vert_up, loop_arc, ghat_arc, boundary_arc, hhat_arc };

struct PathSegment {
    SegmentKind kind = SegmentKind::vert_down;
    Vec2 start{}, end{};
    int component_id = -1;        // slice component for arc kinds
    int vertex_a = -1, vertex_b = -1;  // arc vertex index range endpoints
};

struct AdmissiblePath {
    std::vector<PathSegment> segments;
    Vec2 start_point{};  // on the domain boundary
    Vec2 end_point{};    // the target point x*
};

struct PathBuildResult {
    bool ok = false;
    AdmissiblePath path;
    std::string diagnostic;
    int jitter_attempts = 0;
    int case5_fired = 0, case6_fired = 0;  // which boundary-arc rules fired
};

/// Recursive construction of an admissible path from the domain boundary to
/// x*: vertical first-hit segments through constant-color regions, joined by
/// loop jumps to the extremal fiber point. All slice components must be
/// loops.
PathBuildResult construct_path_compact(const LevelSlice& sigma, const Coloring& col, Vec2 xstar,
                                       const Domain& K, double tol_x);

/// Extension handling boundary arcs: arcs carrying a zero of f_x1 finish
/// with a boundary arc from the far-side endpoint; arcs without one are
/// walked fold-to-fold against the sign of f_x1.
PathBuildResult construct_path_boundary(const LevelSlice& sigma, const Coloring& col, Vec2 xstar,
                                        const Domain& K, double tol_x);

struct PathReport {
    bool ok = true;
    std::vector<std::string> violations;
};

/// Checks segment chaining, start on the boundary / end at x*, the
/// no-component-revisit property, and per-segment admissibility (vertical
/// interiors sampled at 32 points carry the required color; arcs lie on
/// their component).
PathReport validate_path(const AdmissiblePath& p, const LevelSlice& sigma, const Coloring& col,
                         const Domain& K, Vec2 xstar, double eps_geom);

}  // namespace abp
