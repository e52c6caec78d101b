#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "abp/field.hpp"
#include "abp/levelset.hpp"
#include "abp/quadrature.hpp"
#include "abp/topology.hpp"

namespace abp {

struct Check {
    enum class Kind { identity, inequality_rel, inequality_abs };
    std::string name;
    Kind kind = Kind::identity;
    double lhs = 0, rhs = 0;
    double ratio = 0;  // lhs / rhs guarded against rhs ~ 0
    double tolerance = 0;
    bool pass = false;
    bool inconclusive = false;
    std::string notes;
};

Check identity_check(std::string name, double lhs, double rhs, double tol, double abs_floor = 1e-12);
Check inequality_check(std::string name, double lhs, double rhs, double rel_tol);
Check inequality_abs_check(std::string name, double lhs, double rhs, double slack);

struct SliceInfo {
    double z = 0;
    bool retained = false;  // regular, nonzero z
    bool skipped_zero = false;
    bool regular = false;
    double tv = 0, phi = 0, phi1 = 0, phi2 = 0, phi3 = 0;
    int loops = 0, arcs = 0, snapped = 0;
    double min_grad = 0;
};

/// Per-field slice sweep over a uniform z-grid spanning the range of f_x2
/// inside K, padded by one step. Irregular slices and z = 0 are skipped;
/// they carry no weight in the z-integrals.
struct SweepResult {
    double z_lo = 0, z_hi = 0, dz = 0;
    std::vector<SliceInfo> slices;
    std::vector<double> skipped;  // z values of skipped slices
    double max_grad_f = 0, max_grad_fx2 = 0;
    double eps_lem = 0;  // discretization slack: c_slack * h * max |grad f|
    double tol_x = 0;    // fiber matching tolerance: 2 * grid spacing
    double tv_integral = 0, phi_integral = 0;
    bool degenerate_range = false;  // f_x2 constant on K: no slices
};

struct SuiteConfig {
    int nx = 1024, ny = 1024;
    int z_count = 512;
    std::uint64_t seed = 42;
    int path_trials = 10;
    int boundary_samples = 4096;
    double tol_coarea_compact = 0.02;
    double tol_coarea_general = 0.04;
    double tol_bound = 0.02;
    double c_slack = 8.0;
    Exec exec = Exec::parallel;
};

SweepResult run_sweep(const LevelSetExtractor& ex, int z_count, const SuiteConfig& cfg);

struct LambdaSweep {
    double a = 0;
    std::vector<double> lambdas, E_measure, osc_bound;
    double lambda_star = 0;
    bool trivial = false;  // the phi integral vanishes
};

struct VerificationReport {
    std::string field_id;
    Domain domain;
    int nx = 0, ny = 0, z_count = 0;
    std::uint64_t seed = 0;
    std::vector<Check> checks;
    std::vector<double> skipped_slices;
    std::vector<std::array<double, 4>> slice_budgets;  // z, phi, diam*tv, ratio
    LambdaSweep lambda;
    bool has_lambda = false;
    bool pass = true;
};

/// Worst relative error of the analytic gradient/Hessian against central
/// finite differences at step 1e-4, over `npoints` interior samples.
/// Errors are measured against the larger of the local derivative
/// magnitude and the derivative scale over the whole sample batch, so
/// fields with large derivative ranges are not truncation-limited at the
/// pinned step. Points within 2e-4 of a seam boundary are excluded.
double derivative_fd_worst_error(const ScalarField& f, const Domain& K, std::mt19937_64& rng,
                                 int npoints);

Check check_coarea(double integral_abs_det, const SweepResult& sw, double tol);

/// Per-slice phi <= diam * TV with the discretization slack; aggregated
/// into one check, with per-slice rows appended to `rows` when non-null.
Check check_slice_budget(const SweepResult& sw, double diam,
                  std::vector<std::array<double, 4>>* rows = nullptr);

Check check_phi_integral_bound(const ScalarField& f, double osc_K, double diam, const SweepResult& sw, double tol);

Check check_osc_bound_compact(const ScalarField& f, const Domain& K, double osc_K, double integral,
                            double tol);

Check check_osc_bound_general(double osc_K, double osc_boundary, const Domain& K, double integral,
                            double tol);

LambdaSweep lambda_sweep(const SweepResult& sw, double diam);
std::vector<Check> lambda_sweep_checks(const LambdaSweep& ls, double osc_K, double diam, double tol);

/// Chain estimate over one constructed path: per-segment budgets (vertical
/// segments against the tilt bound, arc jumps against their oscillation
/// budgets) and the total change in f against phi(z0) + z0 * dy.
Check check_path_chain(const ScalarField& f, const Domain& K, const LevelSlice& slice,
                       const AdmissiblePath& path, double z0, const PhiBreakdown& phi, double tol_x,
                       double eps_lem);

VerificationReport run_suite(const CatalogEntry& entry, const SuiteConfig& cfg);

}  // namespace abp
