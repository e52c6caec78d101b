#pragma once

#include <cstdint>
#include <vector>

#include "abp/field.hpp"
#include "abp/geometry.hpp"
#include "abp/quadrature.hpp"

namespace abp {

/// One polyline component of a level slice. Closed components repeat the
/// first vertex at the end; open components terminate on the domain
/// boundary. Per-vertex samples are evaluated analytically.
struct CurveComponent {
    std::vector<Vec2> vertices;
    bool closed = false;
    bool endpoints_on_boundary = false;
    std::vector<double> arclengths;   // cumulative, arclengths[0] = 0
    std::vector<double> samples_fx1;  // d f / d x1 at vertices
    std::vector<double> samples_sz;   // f - z * x2 at vertices
    double min_grad_fx2 = 0.0;        // min |grad f_x2| over vertices

    double length() const { return arclengths.empty() ? 0.0 : arclengths.back(); }
};

/// The level set of f_x2 at height z, clipped to a domain and split into
/// closed loops and boundary-to-boundary arcs.
struct LevelSlice {
    double z = 0.0;
    bool regular = true;
    double min_grad_fx2_on_curve = 0.0;  // +inf when the slice is empty
    std::vector<CurveComponent> loops;
    std::vector<CurveComponent> arcs;
    int snapped_nodes = 0;        // grid nodes perturbed by the snap epsilon
    std::vector<int> cut_cells;   // grid cells crossed by the traced curves

    int component_count() const { return static_cast<int>(loops.size() + arcs.size()); }
    const CurveComponent& component(int id) const {
        return id < static_cast<int>(loops.size()) ? loops[id] : arcs[id - loops.size()];
    }
    bool is_loop(int id) const { return id < static_cast<int>(loops.size()); }
};

struct FoldingPoint {
    int index = 0;  // vertex index on the arc
    enum class Kind { fold, boundary_terminal } kind = Kind::fold;
};

/// Extracts level slices of f_x2 over a fixed grid. Node values of f_x2 are
/// sampled once at construction; slice() is safe to call concurrently.
class LevelSetExtractor {
public:
    LevelSetExtractor(const ScalarField& f, const Domain& K, const Grid& g,
                      Exec exec = Exec::parallel);

    LevelSlice slice(double z) const;

    double min_fx2() const { return fx2_min_; }
    double max_fx2() const { return fx2_max_; }
    double min_fx2_in_domain() const { return fx2_min_K_; }
    double max_fx2_in_domain() const { return fx2_max_K_; }
    double max_grad_fx2() const { return max_grad_fx2_; }
    double max_grad_f() const { return max_grad_f_; }
    double eps_regular() const { return eps_reg_; }
    const Grid& grid() const { return grid_; }
    const Domain& domain() const { return domain_; }
    const ScalarField& field() const { return *field_; }

private:
    const ScalarField* field_;
    Domain domain_;
    Grid grid_;
    std::vector<double> fx2_;        // node values of f_x2
    std::vector<float> cell_min_, cell_max_;
    double fx2_min_ = 0, fx2_max_ = 0;
    double fx2_min_K_ = 0, fx2_max_K_ = 0;
    double max_grad_fx2_ = 0, max_grad_f_ = 0;
    double eps_snap_ = 0, eps_reg_ = 0;
};

/// One-shot extraction; builds a throwaway extractor.
LevelSlice extract_level_set(const ScalarField& f, double z, const Domain& K, const Grid& g);

/// Discrete total variation of samples_fx1 along the component.
double total_variation_along(const CurveComponent& c);

/// Sum of total_variation_along over all components of the slice.
double tv_of_slice(const LevelSlice& s);

/// Length of the interval union of the component's first-coordinate
/// projection (the measure of p1(C), not the diameter).
double projected_length(const CurveComponent& c);

/// Sum over loops of the vertical oscillation of the tilted samples.
/// Requires a regular slice with no arcs; throws std::invalid_argument
/// otherwise (use phi_general for slices that touch the boundary).
double phi_compact(const LevelSlice& s, double tol_x);

/// Vertex indices where the sign of the first-coordinate increment flips
/// across a (possibly zero-increment) run. The component must be open.
std::vector<FoldingPoint> find_folding_points(const CurveComponent& c);

/// First parameter (vertex index) at which the polyline crosses the first
/// coordinate of vertex i, capped at i itself. Crossings interior to an
/// edge snap to the nearer endpoint.
int ghat(const CurveComponent& c, int i);

/// Reference implementation of ghat: plain linear scan over edges.
int ghat_linear_scan(const CurveComponent& c, int i);

/// ghat for every vertex in one sweep (used by the arc partition search);
/// agrees with the per-query scan.
std::vector<int> ghat_batch(const CurveComponent& c);

/// Index of the last fold strictly before i, or 0 if none.
int hhat(const CurveComponent& c, int i, const std::vector<FoldingPoint>& folds);

struct PhiBreakdown {
    double phi1 = 0, phi2 = 0, phi3 = 0;
    double total() const { return phi1 + phi2 + phi3; }
};

/// Oscillation budget of a regular slice: loop vertical oscillations, plus
/// the partition suprema over arcs without an f_x1 zero, plus the endpoint
/// deficit over arcs that carry one. Throws on irregular slices.
PhiBreakdown phi_general(const LevelSlice& s, double tol_x, double eps_zero);

/// Parameters (fractional vertex indices) of the f_x1 zeros on an arc,
/// detected by sign change or |f_x1| <= eps_zero at a vertex.
std::vector<double> fx1_zero_params(const CurveComponent& c, double eps_zero);

/// Zero-membership tolerance scaled to the slice: 1e-9 times the largest
/// |f_x1| sample over all components.
double default_eps_zero(const LevelSlice& s);

}  // namespace abp
