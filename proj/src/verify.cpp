#include "abp/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace abp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double urand(std::mt19937_64& rng, double a, double b) {
    return a + (b - a) * ((rng() >> 11) * 0x1.0p-53);
}

double safe_ratio(double lhs, double rhs) {
    if (std::abs(rhs) < 1e-30 * std::max(1.0, std::abs(lhs))) return 0.0;
    return lhs / rhs;
}

double trapz_retained(const std::vector<SliceInfo>& slices, double SliceInfo::* field) {
    double total = 0.0;
    const SliceInfo* prev = nullptr;
    for (const auto& s : slices) {
        if (!s.retained) continue;
        if (prev) total += 0.5 * (s.z - prev->z) * (s.*field + prev->*field);
        prev = &s;
    }
    return total;
}

}  // namespace

Check identity_check(std::string name, double lhs, double rhs, double tol, double abs_floor) {
    Check c;
    c.name = std::move(name);
    c.kind = Check::Kind::identity;
    c.lhs = lhs;
    c.rhs = rhs;
    c.ratio = safe_ratio(lhs, rhs);
    c.tolerance = tol;
    c.pass = std::abs(lhs - rhs) <= tol * std::max({std::abs(lhs), std::abs(rhs), abs_floor});
    return c;
}

Check inequality_check(std::string name, double lhs, double rhs, double rel_tol) {
    Check c;
    c.name = std::move(name);
    c.kind = Check::Kind::inequality_rel;
    c.lhs = lhs;
    c.rhs = rhs;
    c.ratio = safe_ratio(lhs, rhs);
    c.tolerance = rel_tol;
    c.pass = lhs <= rhs * (1.0 + rel_tol) + 1e-300;
    return c;
}

Check inequality_abs_check(std::string name, double lhs, double rhs, double slack) {
    Check c;
    c.name = std::move(name);
    c.kind = Check::Kind::inequality_abs;
    c.lhs = lhs;
    c.rhs = rhs;
    c.ratio = safe_ratio(lhs, rhs);
    c.tolerance = slack;
    c.pass = lhs <= rhs + slack;
    return c;
}

SweepResult run_sweep(const LevelSetExtractor& ex, int z_count, const SuiteConfig& cfg) {
    SweepResult sw;
    const Grid& g = ex.grid();
    sw.max_grad_f = ex.max_grad_f();
    sw.max_grad_fx2 = ex.max_grad_fx2();
    sw.eps_lem = cfg.c_slack * g.spacing() * sw.max_grad_f;
    sw.tol_x = 2.0 * g.spacing();

    const double zmin = ex.min_fx2_in_domain(), zmax = ex.max_fx2_in_domain();
    const double width = zmax - zmin;
    if (!(width > 0) || z_count < 2) {
        sw.degenerate_range = true;
        return sw;
    }
    const double pad = width / (z_count - 1);
    sw.z_lo = zmin - pad;
    sw.z_hi = zmax + pad;
    sw.dz = (sw.z_hi - sw.z_lo) / (z_count - 1);
    sw.slices.assign(z_count, {});
    const double z_zero_eps = 1e-12 * std::max(std::abs(sw.z_lo), std::abs(sw.z_hi));

    auto do_slice = [&](int i) {
        SliceInfo si;
        si.z = sw.z_lo + i * sw.dz;
        if (std::abs(si.z) <= z_zero_eps) {
            si.skipped_zero = true;
        } else {
            const LevelSlice sl = ex.slice(si.z);
            si.regular = sl.regular;
            si.loops = static_cast<int>(sl.loops.size());
            si.arcs = static_cast<int>(sl.arcs.size());
            si.snapped = sl.snapped_nodes;
            si.min_grad = sl.min_grad_fx2_on_curve;
            if (sl.regular) {
                si.retained = true;
                si.tv = tv_of_slice(sl);
                const PhiBreakdown pb = phi_general(sl, sw.tol_x, default_eps_zero(sl));
                si.phi1 = pb.phi1;
                si.phi2 = pb.phi2;
                si.phi3 = pb.phi3;
                si.phi = pb.total();
            }
        }
        sw.slices[i] = si;
    };
    if (cfg.exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
        for (int i = 0; i < z_count; ++i) do_slice(i);
    } else {
        for (int i = 0; i < z_count; ++i) do_slice(i);
    }
    for (const auto& s : sw.slices)
        if (!s.retained) sw.skipped.push_back(s.z);
    sw.tv_integral = trapz_retained(sw.slices, &SliceInfo::tv);
    sw.phi_integral = trapz_retained(sw.slices, &SliceInfo::phi);
    return sw;
}

Check check_coarea(double integral_abs_det, const SweepResult& sw, double tol) {
    Check c = identity_check("coarea_identity", integral_abs_det, sw.tv_integral, tol,
                             1e-10 * std::max(1.0, std::abs(integral_abs_det)));
    int retained = 0;
    for (const auto& s : sw.slices) retained += s.retained;
    if (!sw.degenerate_range && retained == 0 && integral_abs_det > tol) {
        c.inconclusive = true;
        c.pass = false;
        c.notes = "all slices irregular";
    } else if (sw.degenerate_range && std::abs(integral_abs_det) <= 1e-10) {
        c.pass = true;  // constant f_x2: both sides vanish
    }
    return c;
}

Check check_slice_budget(const SweepResult& sw, double diam, std::vector<std::array<double, 4>>* rows) {
    double worst = -kInf;
    int total = 0, failed = 0;
    for (const auto& s : sw.slices) {
        if (!s.retained) continue;
        ++total;
        const double rhs = diam * s.tv;
        const double excess = s.phi - rhs;
        worst = std::max(worst, excess);
        if (excess > sw.eps_lem) ++failed;
        if (rows) rows->push_back({s.z, s.phi, rhs, safe_ratio(s.phi, rhs)});
    }
    Check c = inequality_abs_check("slice_budget", total ? worst : 0.0, 0.0, sw.eps_lem);
    std::ostringstream os;
    os << total << " regular slices, " << failed << " over budget";
    c.notes = os.str();
    c.pass = failed == 0;
    return c;
}

Check check_phi_integral_bound(const ScalarField& f, double osc_K, double diam, const SweepResult& sw, double tol) {
    if (!f.compactly_supported)
        throw std::invalid_argument("check_phi_integral_bound: field is not compactly supported");
    return inequality_check("osc_phi_bound", osc_K * osc_K, 16.0 * diam * sw.phi_integral, tol);
}

Check check_osc_bound_compact(const ScalarField& f, const Domain& K, double osc_K, double integral,
                            double tol) {
    if (!f.compactly_supported || !f.support)
        throw std::invalid_argument("check_osc_bound_compact: field is not compactly supported");
    for (const Vec2& p : f.support->boundary_samples(32))
        if (!K.contains(p) && K.boundary_distance(p) > 1e-9 * K.diameter())
            throw std::invalid_argument("check_osc_bound_compact: support not inside K");
    const double diam = K.diameter();
    return inequality_check("osc_bound_compact", osc_K * osc_K, 16.0 * diam * diam * integral, tol);
}

Check check_osc_bound_general(double osc_K, double osc_boundary, const Domain& K, double integral,
                            double tol) {
    const double diam = K.diameter();
    const double lhs = std::max(0.0, osc_K - osc_boundary);
    return inequality_check("osc_bound_general", lhs * lhs, 16.0 * diam * diam * integral, tol);
}

LambdaSweep lambda_sweep(const SweepResult& sw, double diam) {
    LambdaSweep ls;
    ls.a = 1.01 * sw.phi_integral;
    if (!(ls.a > 0)) {
        ls.trivial = true;
        return ls;
    }
    ls.lambda_star = std::sqrt(ls.a * diam);
    const int n = 32;
    ls.lambdas.resize(n);
    ls.E_measure.resize(n);
    ls.osc_bound.resize(n);
    for (int i = 0; i < n; ++i) {
        const double expo = -2.0 + 4.0 * i / (n - 1);
        const double lam = ls.lambda_star * std::pow(10.0, expo);
        ls.lambdas[i] = lam;
        int count = 0;
        for (const auto& s : sw.slices) count += s.retained && s.phi >= lam;
        ls.E_measure[i] = count * sw.dz;
        ls.osc_bound[i] = (ls.a / lam) * diam + lam;
    }
    return ls;
}

std::vector<Check> lambda_sweep_checks(const LambdaSweep& ls, double osc_K, double diam, double tol) {
    std::vector<Check> out;
    if (ls.trivial) {
        Check markov = inequality_abs_check("lambda_markov", 0.0, 0.0, 0.0);
        markov.notes = "phi integral vanishes; sweep trivial";
        Check osc = inequality_abs_check("lambda_osc_bound", osc_K, 0.0, 1e-9 * std::max(1.0, osc_K));
        if (!osc.pass) osc.notes = "anomaly: zero phi integral with nonzero oscillation";
        Check star = identity_check("lambda_star_formula", 0.0, 0.0, 1e-12);
        out.push_back(markov);
        out.push_back(osc);
        out.push_back(star);
        return out;
    }
    double worst = -kInf;
    for (std::size_t i = 0; i < ls.lambdas.size(); ++i)
        worst = std::max(worst, ls.E_measure[i] - ls.a / ls.lambdas[i]);
    out.push_back(inequality_abs_check("lambda_markov", worst, 0.0, 0.0));

    out.push_back(
        inequality_check("lambda_osc_bound", osc_K, 4.0 * std::sqrt(ls.a * diam), tol));

    const auto arg_min =
        std::min_element(ls.osc_bound.begin(), ls.osc_bound.end()) - ls.osc_bound.begin();
    std::size_t star_idx = 0;
    double best = kInf;
    for (std::size_t i = 0; i < ls.lambdas.size(); ++i) {
        const double d = std::abs(std::log10(ls.lambdas[i] / ls.lambda_star));
        if (d < best) {
            best = d;
            star_idx = i;
        }
    }
    Check step = inequality_abs_check(
        "lambda_star_minimizes", std::abs(static_cast<double>(arg_min) - static_cast<double>(star_idx)),
        1.0, 0.0);
    out.push_back(step);

    out.push_back(identity_check("lambda_star_formula", ls.lambda_star, std::sqrt(ls.a * diam), 1e-12));
    return out;
}

Check check_path_chain(const ScalarField& f, const Domain& K, const LevelSlice& slice,
                       const AdmissiblePath& path, double z0, const PhiBreakdown& phi, double tol_x,
                       double eps_lem) {
    auto S = [&](Vec2 p) { return f.value(p) - z0 * p.y; };
    double total = 0.0;
    int seg_violations = 0;
    for (const auto& seg : path.segments) {
        const double df = f.value(seg.end) - f.value(seg.start);
        total += df;
        switch (seg.kind) {
            case SegmentKind::vert_down:
            case SegmentKind::vert_up:
                if (df > z0 * (seg.end.y - seg.start.y) + eps_lem) ++seg_violations;
                break;
            case SegmentKind::loop_arc: {
                const auto& c = slice.component(seg.component_id);
                const double budget = vertical_oscillation(c.vertices, c.samples_sz, tol_x);
                if (S(seg.end) - S(seg.start) > budget + eps_lem) ++seg_violations;
                break;
            }
            case SegmentKind::hhat_arc:
            case SegmentKind::ghat_arc:
                if (S(seg.end) - S(seg.start) > phi.phi2 + eps_lem) ++seg_violations;
                break;
            case SegmentKind::boundary_arc:
                if (S(seg.end) - S(seg.start) > phi.phi3 + eps_lem) ++seg_violations;
                break;
        }
    }
    const Vec2 q = path.start_point, xs = path.end_point;
    const double rhs = phi.total() + z0 * (xs.y - q.y);
    Check c = inequality_abs_check("path_chain", total, rhs, eps_lem);
    const bool criterion = total <= phi.total() + std::abs(z0) * K.diameter() + eps_lem;
    c.pass = c.pass && criterion && seg_violations == 0;
    std::ostringstream os;
    os << path.segments.size() << " segments, " << seg_violations << " budget violations";
    c.notes = os.str();
    return c;
}

namespace {

Vec2 sample_interior_point(std::mt19937_64& rng, const Domain& K, const ScalarField& f) {
    for (int tries = 0; tries < 1000; ++tries) {
        const Vec2 p{urand(rng, K.lo.x, K.hi.x), urand(rng, K.lo.y, K.hi.y)};
        if (!K.contains(p)) continue;
        if (K.boundary_distance(p) < 1e-3 * K.diameter()) continue;
        bool near_seam = false;
        for (const Domain& s : f.seams) near_seam = near_seam || s.boundary_distance(p) <= 2e-4;
        if (near_seam) continue;
        return p;
    }
    return K.midpoint();
}

}  // namespace

double derivative_fd_worst_error(const ScalarField& f, const Domain& K, std::mt19937_64& rng,
                                 int npoints) {
    const double h = 1e-4;
    struct Sample {
        double gdiff, ga, gf, hdiff, ha, hf;
    };
    std::vector<Sample> samples;
    samples.reserve(npoints);
    double gscale = 1.0, hscale = 1.0;
    for (int k = 0; k < npoints; ++k) {
        const Vec2 p = sample_interior_point(rng, K, f);
        const Vec2 ga = f.gradient(p);
        const Mat2 ha = f.hessian(p);
        const double fpx = f.value({p.x + h, p.y}), fmx = f.value({p.x - h, p.y});
        const double fpy = f.value({p.x, p.y + h}), fmy = f.value({p.x, p.y - h});
        const double f0 = f.value(p);
        const Vec2 gf{(fpx - fmx) / (2 * h), (fpy - fmy) / (2 * h)};
        const double hxx = (fpx - 2 * f0 + fmx) / (h * h);
        const double hyy = (fpy - 2 * f0 + fmy) / (h * h);
        const double hxy = (f.value({p.x + h, p.y + h}) - f.value({p.x + h, p.y - h}) -
                            f.value({p.x - h, p.y + h}) + f.value({p.x - h, p.y - h})) /
                           (4 * h * h);
        Sample s;
        s.ga = norm(ga);
        s.gf = norm(gf);
        s.gdiff = norm(ga - gf);
        s.ha = std::sqrt(ha.xx * ha.xx + 2 * ha.xy * ha.xy + ha.yy * ha.yy);
        s.hf = std::sqrt(hxx * hxx + 2 * hxy * hxy + hyy * hyy);
        s.hdiff = std::sqrt((ha.xx - hxx) * (ha.xx - hxx) + 2 * (ha.xy - hxy) * (ha.xy - hxy) +
                            (ha.yy - hyy) * (ha.yy - hyy));
        gscale = std::max({gscale, s.ga, s.gf});
        hscale = std::max({hscale, s.ha, s.hf});
        samples.push_back(s);
    }
    double worst = 0.0;
    for (const Sample& s : samples) {
        worst = std::max(worst, s.gdiff / gscale);
        worst = std::max(worst, s.hdiff / hscale);
    }
    return worst;
}

VerificationReport run_suite(const CatalogEntry& entry, const SuiteConfig& cfg) {
    const ScalarField& f = entry.field;
    const Domain& K = entry.domain;
    VerificationReport rep;
    rep.field_id = f.id;
    rep.domain = K;
    rep.nx = cfg.nx;
    rep.ny = cfg.ny;
    rep.z_count = cfg.z_count;
    rep.seed = cfg.seed;

    const Grid g = make_grid(K, cfg.nx, cfg.ny);
    const double diam = K.diameter();
    std::mt19937_64 rng(cfg.seed);

    // derivative oracle
    rep.checks.push_back(
        inequality_abs_check("derivative_oracle", derivative_fd_worst_error(f, K, rng, 100), 0.0, 1e-6));

    // compact support: exact vanishing outside the support domain
    if (f.compactly_supported && f.support) {
        const Domain& s = *f.support;
        const double mx = 0.75 * (s.hi.x - s.lo.x), my = 0.75 * (s.hi.y - s.lo.y);
        double worst = 0.0;
        int found = 0;
        while (found < 1000) {
            const Vec2 p{urand(rng, s.lo.x - mx, s.hi.x + mx), urand(rng, s.lo.y - my, s.hi.y + my)};
            if (s.contains(p)) continue;
            ++found;
            const Mat2 h = f.hessian(p);
            worst = std::max({worst, std::abs(f.value(p)), norm(f.gradient(p)), std::abs(h.xx),
                              std::abs(h.xy), std::abs(h.yy)});
        }
        rep.checks.push_back(inequality_abs_check("support_vanishing", worst, 0.0, 0.0));
    }

    LevelSetExtractor ex(f, K, g, cfg.exec);
    const SweepResult sw = run_sweep(ex, cfg.z_count, cfg);
    rep.skipped_slices = sw.skipped;

    const IntegralResult integ = integrate_abs_det_hessian(f, K, g, cfg.exec);
    const double osc_K = oscillation_over_grid(f, K, g, cfg.exec);
    const double osc_b = oscillation_over_boundary(f, K, cfg.boundary_samples);

    rep.checks.push_back(check_coarea(
        integ.value, sw, f.compactly_supported ? cfg.tol_coarea_compact : cfg.tol_coarea_general));
    rep.checks.push_back(check_slice_budget(sw, diam, &rep.slice_budgets));
    if (f.compactly_supported) {
        rep.checks.push_back(check_phi_integral_bound(f, osc_K, diam, sw, cfg.tol_bound));
        rep.checks.push_back(check_osc_bound_compact(f, K, osc_K, integ.value, cfg.tol_bound));
    }
    rep.checks.push_back(check_osc_bound_general(osc_K, osc_b, K, integ.value, cfg.tol_bound));
    if (f.compactly_supported) {
        rep.lambda = lambda_sweep(sw, diam);
        rep.has_lambda = true;
        for (auto& c : lambda_sweep_checks(rep.lambda, osc_K, diam, cfg.tol_bound))
            rep.checks.push_back(std::move(c));
    }

    // randomized admissible-path trials with full chain estimates
    {
        std::vector<int> retained;
        for (int i = 0; i < static_cast<int>(sw.slices.size()); ++i)
            if (sw.slices[i].retained) retained.push_back(i);
        int built = 0, valid = 0, chains = 0, attempted = 0;
        std::string first_failure;
        std::map<int, LevelSlice> slice_cache;
        if (!retained.empty()) {
            for (int t = 0; t < cfg.path_trials; ++t) {
                ++attempted;
                const int zi = retained[static_cast<std::size_t>(urand(rng, 0, 1) * retained.size()) %
                                        retained.size()];
                const double z0 = sw.slices[zi].z;
                auto it = slice_cache.find(zi);
                if (it == slice_cache.end()) it = slice_cache.emplace(zi, ex.slice(z0)).first;
                const LevelSlice& sl = it->second;
                bool trial_done = false;
                for (int draw = 0; draw < 60 && !trial_done; ++draw) {
                    const Vec2 p{urand(rng, K.lo.x, K.hi.x), urand(rng, K.lo.y, K.hi.y)};
                    if (!K.contains(p) || K.boundary_distance(p) < 4 * g.spacing()) continue;
                    const double fx2_p = f.gradient(p).y;
                    if (std::abs(fx2_p - z0) <= 1e-9 * std::max(1.0, std::abs(z0))) continue;
                    const int parity = fx2_p < z0 ? 1 : 0;
                    try {
                        const Coloring col = build_coloring(sl, K, g, p, parity);
                        const PathBuildResult pr = construct_path_boundary(sl, col, p, K, sw.tol_x);
                        if (!pr.ok) {
                            if (first_failure.empty()) first_failure = pr.diagnostic;
                            trial_done = true;
                            break;
                        }
                        ++built;
                        const PathReport v =
                            validate_path(pr.path, sl, col, K, pr.path.end_point, 1e-7 * diam);
                        if (v.ok) {
                            ++valid;
                        } else if (first_failure.empty()) {
                            first_failure = v.violations.front();
                        }
                        const PhiBreakdown pb = phi_general(sl, sw.tol_x, default_eps_zero(sl));
                        const Check chain =
                            check_path_chain(f, K, sl, pr.path, z0, pb, sw.tol_x, sw.eps_lem);
                        if (chain.pass) {
                            ++chains;
                        } else if (first_failure.empty()) {
                            first_failure = "chain estimate failed: " + chain.notes;
                        }
                        trial_done = true;
                    } catch (const std::invalid_argument&) {
                        continue;  // base point in a boundary cell: redraw
                    } catch (const DegenerateConfiguration& e) {
                        if (first_failure.empty()) first_failure = e.what();
                        trial_done = true;
                    } catch (const ConstructionFailure& e) {
                        if (first_failure.empty()) first_failure = e.what();
                        trial_done = true;
                    }
                }
            }
        }
        Check built_c = inequality_abs_check("path_construction",
                                             static_cast<double>(attempted - built), 0.0, 0.0);
        Check valid_c = inequality_abs_check("path_validation",
                                             static_cast<double>(built - valid), 0.0, 0.0);
        Check chain_c = inequality_abs_check("path_chain_all",
                                             static_cast<double>(built - chains), 0.0, 0.0);
        std::ostringstream os;
        os << attempted << " trials, " << built << " built, " << valid << " valid, " << chains
           << " chains ok";
        if (!first_failure.empty()) os << "; first failure: " << first_failure;
        built_c.notes = os.str();
        if (attempted == 0) {
            built_c.notes = "no regular slices to draw from";
        }
        rep.checks.push_back(built_c);
        rep.checks.push_back(valid_c);
        rep.checks.push_back(chain_c);
    }

    // Schur determinant identity on random symmetric matrices
    {
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            Mat3 M;
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j) M.m[i][j] = M.m[j][i] = urand(rng, -1, 1);
            while (std::abs(M.m[2][2]) < 0.1) M.m[2][2] = urand(rng, -1, 1);
            worst = std::max(worst, schur_det_identity(M));
        }
        rep.checks.push_back(inequality_abs_check("schur_identity", worst, 0.0, 1e-12));
    }

    rep.pass = true;
    for (const auto& c : rep.checks)
        if (!c.inconclusive && !c.pass) rep.pass = false;
    return rep;
}

}  // namespace abp
