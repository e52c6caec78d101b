#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "abp/field.hpp"
#include "abp/levelset.hpp"
#include "abp/topology.hpp"
#include "abp/verify.hpp"

namespace abp {

using ordered_json = nlohmann::ordered_json;

ordered_json domain_to_json(const Domain& d);
Domain domain_from_json(const nlohmann::json& j);

/// Field-spec object: {"type": "bump"|"modulated_bump"|"paper_figure"|
/// "affine"|"zero"|"sum", ...parameters, "domain": optional}.
CatalogEntry entry_from_json(const nlohmann::json& j);
CatalogEntry load_field_spec(const std::string& path);

/// Builtin id like "bump", or a path to a field-spec JSON file.
CatalogEntry resolve_field(const std::string& id_or_path);

ordered_json report_to_json(const VerificationReport& r);
ordered_json slice_to_json(const LevelSlice& s);
ordered_json path_to_json(const AdmissiblePath& p);

}  // namespace abp
