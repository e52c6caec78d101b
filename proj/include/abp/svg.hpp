#pragma once

#include <optional>
#include <string>

#include "abp/field.hpp"
#include "abp/levelset.hpp"
#include "abp/topology.hpp"

namespace abp {

struct SvgOptions {
    double width_px = 800;
    std::string note;  // free-form annotation printed under the title
};

/// Level-set figure: dashed domain boundary, solid loops, distinct arcs,
/// and the +-1 coloring as a shaded fill. All coordinates are written with
/// six significant digits.
std::string render_slice_svg(const LevelSlice& slice, const Domain& K, const Coloring* coloring,
                             const SvgOptions& opt = {});

/// Same figure plus an admissible path with per-kind styling and labeled
/// waypoints.
std::string render_path_svg(const LevelSlice& slice, const Domain& K, const Coloring* coloring,
                            const AdmissiblePath& path, const SvgOptions& opt = {});

}  // namespace abp
