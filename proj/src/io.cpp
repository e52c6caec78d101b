#include "abp/io.hpp"

#include <fstream>
#include <stdexcept>

namespace abp {

namespace {

Vec2 vec_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected [x, y]");
    return {j[0].get<double>(), j[1].get<double>()};
}

nlohmann::json vec_to_json(Vec2 v) { return nlohmann::json::array({v.x, v.y}); }

ScalarField field_from_json(const nlohmann::json& j);

ScalarField sum_from_json(const nlohmann::json& j) {
    std::vector<ScalarField> terms;
    for (const auto& t : j.at("terms")) terms.push_back(field_from_json(t));
    return make_sum(std::move(terms));
}

ScalarField field_from_json(const nlohmann::json& j) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "bump")
        return make_bump(vec_from_json(j.at("center")), j.at("radius").get<double>(),
                         j.value("amplitude", 1.0));
    if (type == "modulated_bump")
        return make_modulated_bump(vec_from_json(j.at("center")), j.at("radius").get<double>(),
                                   j.value("amplitude", 1.0));
    if (type == "paper_figure") return make_paper_figure_field();
    if (type == "affine")
        return make_affine(j.value("a", 0.0), j.value("b", 0.0), j.value("c", 0.0));
    if (type == "zero") return make_zero();
    if (type == "sum") return sum_from_json(j);
    throw std::invalid_argument("unknown field type: " + type);
}

Domain default_domain_for(const ScalarField& f) {
    if (f.support) {
        if (f.support->shape == Domain::Shape::disk) return *f.support;
        const Vec2 pad{0.1 * (f.support->hi.x - f.support->lo.x), 0.1 * (f.support->hi.y - f.support->lo.y)};
        return Domain::make_rect(f.support->lo - pad, f.support->hi + pad);
    }
    if (f.id == "paper_figure") return Domain::make_disk({2.54, -3.62}, 2.6);
    return Domain::make_rect({-1, -1}, {1, 1});
}

}  // namespace

ordered_json domain_to_json(const Domain& d) {
    ordered_json j;
    if (d.shape == Domain::Shape::disk) {
        j["shape"] = "disk";
        j["center"] = vec_to_json(d.center);
        j["radius"] = d.radius;
    } else {
        j["shape"] = "rect";
        j["lo"] = vec_to_json(d.lo);
        j["hi"] = vec_to_json(d.hi);
    }
    return j;
}

Domain domain_from_json(const nlohmann::json& j) {
    const std::string shape = j.at("shape").get<std::string>();
    if (shape == "disk") return Domain::make_disk(vec_from_json(j.at("center")), j.at("radius").get<double>());
    if (shape == "rect") return Domain::make_rect(vec_from_json(j.at("lo")), vec_from_json(j.at("hi")));
    throw std::invalid_argument("unknown domain shape: " + shape);
}

CatalogEntry entry_from_json(const nlohmann::json& j) {
    CatalogEntry e;
    e.field = field_from_json(j);
    if (j.contains("id")) e.field.id = j.at("id").get<std::string>();
    e.domain = j.contains("domain") ? domain_from_json(j.at("domain")) : default_domain_for(e.field);
    return e;
}

CatalogEntry load_field_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open field spec: " + path);
    nlohmann::json j;
    in >> j;
    return entry_from_json(j);
}

CatalogEntry resolve_field(const std::string& id_or_path) {
    for (auto& e : catalog())
        if (e.field.id == id_or_path) return e;
    return load_field_spec(id_or_path);
}

ordered_json report_to_json(const VerificationReport& r) {
    ordered_json j;
    j["field"] = r.field_id;
    j["domain"] = domain_to_json(r.domain);
    j["grid"] = {r.nx, r.ny};
    j["z_samples"] = r.z_count;
    j["seed"] = r.seed;
    ordered_json checks = ordered_json::array();
    for (const auto& c : r.checks) {
        ordered_json cj;
        cj["name"] = c.name;
        cj["kind"] = c.kind == Check::Kind::identity
                         ? "identity"
                         : (c.kind == Check::Kind::inequality_rel ? "inequality_rel" : "inequality_abs");
        cj["lhs"] = c.lhs;
        cj["rhs"] = c.rhs;
        cj["ratio"] = c.ratio;
        cj["tolerance"] = c.tolerance;
        cj["pass"] = c.pass;
        if (c.inconclusive) cj["inconclusive"] = true;
        if (!c.notes.empty()) cj["notes"] = c.notes;
        checks.push_back(std::move(cj));
    }
    j["checks"] = std::move(checks);
    j["skipped_slices"] = r.skipped_slices;
    ordered_json rows = ordered_json::array();
    for (const auto& row : r.slice_budgets) rows.push_back({row[0], row[1], row[2], row[3]});
    j["slice_budgets"] = std::move(rows);
    if (r.has_lambda) {
        ordered_json lj;
        lj["a"] = r.lambda.a;
        lj["trivial"] = r.lambda.trivial;
        lj["lambda_star"] = r.lambda.lambda_star;
        lj["lambdas"] = r.lambda.lambdas;
        lj["E_measure"] = r.lambda.E_measure;
        lj["osc_bound"] = r.lambda.osc_bound;
        j["lambda_sweep"] = std::move(lj);
    }
    j["pass"] = r.pass;
    return j;
}

ordered_json slice_to_json(const LevelSlice& s) {
    ordered_json j;
    j["z"] = s.z;
    j["regular"] = s.regular;
    j["min_grad_fx2"] = s.min_grad_fx2_on_curve;
    j["snapped_nodes"] = s.snapped_nodes;
    auto comp_to_json = [](const CurveComponent& c) {
        ordered_json cj;
        cj["closed"] = c.closed;
        cj["endpoints_on_boundary"] = c.endpoints_on_boundary;
        ordered_json pts = ordered_json::array();
        for (const Vec2& p : c.vertices) pts.push_back({p.x, p.y});
        cj["vertices"] = std::move(pts);
        cj["fx1"] = c.samples_fx1;
        cj["sz"] = c.samples_sz;
        cj["arclengths"] = c.arclengths;
        return cj;
    };
    ordered_json loops = ordered_json::array(), arcs = ordered_json::array();
    for (const auto& c : s.loops) loops.push_back(comp_to_json(c));
    for (const auto& c : s.arcs) arcs.push_back(comp_to_json(c));
    j["loops"] = std::move(loops);
    j["arcs"] = std::move(arcs);
    return j;
}

ordered_json path_to_json(const AdmissiblePath& p) {
    ordered_json j;
    j["start"] = {p.start_point.x, p.start_point.y};
    j["end"] = {p.end_point.x, p.end_point.y};
    ordered_json segs = ordered_json::array();
    static const char* names[] = {"vert_down", "vert_up", "loop_arc", "ghat_arc", "boundary_arc", "hhat_arc"};
    for (const auto& s : p.segments) {
        ordered_json sj;
        sj["kind"] = names[static_cast<int>(s.kind)];
        sj["start"] = {s.start.x, s.start.y};
        sj["end"] = {s.end.x, s.end.y};
        if (s.component_id >= 0) sj["component"] = s.component_id;
        segs.push_back(std::move(sj));
    }
    j["segments"] = std::move(segs);
    return j;
}

}  // namespace abp
