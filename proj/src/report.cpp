#include <fstream>
#include <set>

#include "radfid/csv.hpp"
#include "radfid/numeric.hpp"
#include "radfid/pipeline.hpp"

namespace radfid {

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto partial = std::filesystem::path(path.string() + ".partial");
  {
    std::ofstream out(partial, std::ios::binary);
    if (!out) throw IoError("cannot write " + partial.string());
    out << content;
    if (!out.flush()) throw IoError("short write to " + partial.string());
  }
  std::filesystem::rename(partial, path);
}

namespace {

std::string mean_sd_cell(const std::vector<double>& xs) {
  const MeanSd m = mean_sd(xs);
  return format_g9(m.mean) + "±" + format_g9(m.sd);
}

}  // namespace

void write_quality_csv(const std::filesystem::path& path,
                       const std::vector<std::string>& case_ids,
                       const std::vector<QualityReport>& reports) {
  if (case_ids.size() != reports.size())
    throw ValidationError("quality csv needs one report per case");
  if (case_ids.empty()) throw ValidationError("quality csv needs at least one case");

  CsvRows rows;
  rows.push_back({"case_id", "mae", "mse", "psnr_db", "ssim"});
  std::vector<double> maes, mses, psnrs, ssims;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& q = reports[i];
    rows.push_back({case_ids[i], format_g9(q.mae), format_g9(q.mse),
                    format_g9(q.psnr_db), format_g9(q.ssim)});
    maes.push_back(q.mae);
    mses.push_back(q.mse);
    if (std::isfinite(q.psnr_db)) psnrs.push_back(q.psnr_db);
    ssims.push_back(q.ssim);
  }
  rows.push_back({"mean±sd", mean_sd_cell(maes), mean_sd_cell(mses),
                  psnrs.empty() ? "inf±0" : mean_sd_cell(psnrs), mean_sd_cell(ssims)});

  std::string text;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) text += ',';
      text += row[c];
    }
    text += '\n';
  }
  write_text_atomic(path, text);
}

nlohmann::json group_assignment_to_json(const GroupAssignment& groups,
                                        const std::vector<NetworkProfile>& profiles,
                                        double ssim_cutoff) {
  nlohmann::json j;
  j["tau"] = groups.tau;
  j["ssim_cutoff"] = ssim_cutoff;
  nlohmann::json profs = nlohmann::json::array();
  for (const auto& p : profiles)
    profs.push_back({{"network", p.network_id},
                     {"mean_ssim", p.mean_ssim},
                     {"high_performance", p.high_performance}});
  j["profiles"] = profs;
  j["group_sizes"] = {groups.group_sizes[0], groups.group_sizes[1], groups.group_sizes[2]};
  j["feature_ids"] = groups.feature_ids;
  j["groups"] = groups.group;
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& cell : groups.summary) {
    nlohmann::json c{{"group", cell.group},
                     {"network", cell.network_id},
                     {"n_features", cell.n_features}};
    // Empty groups have no mean to report; the keys are simply absent.
    if (cell.n_features > 0) {
      c["mean_abs_rho"] = cell.mean_abs_rho;
      c["sd_abs_rho"] = cell.sd_abs_rho;
    }
    cells.push_back(c);
  }
  j["summary"] = cells;
  return j;
}

nlohmann::json classification_report_to_json(const ClassificationReport& report) {
  nlohmann::json j;
  j["accuracy_mean"] = report.accuracy_mean;
  j["accuracy_sd"] = report.accuracy_sd;
  j["auc_mean"] = report.auc_mean;
  j["auc_sd"] = report.auc_sd;
  j["pooled_auc"] = report.pooled_auc;
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& r : report.repeats)
    reps.push_back({{"repeat", r.repeat},
                    {"selected_depth", r.selected_depth},
                    {"accuracy", r.accuracy},
                    {"auc", r.auc}});
  j["repeats"] = reps;
  // fpr/tpr pairs only: the sweep's leading threshold is infinite, which
  // JSON cannot carry as a number.
  nlohmann::json roc = nlohmann::json::array();
  for (const auto& p : report.pooled_roc) roc.push_back({p.fpr, p.tpr});
  j["pooled_roc"] = roc;
  return j;
}

namespace {

const char* json_type_name(const nlohmann::json& v) {
  switch (v.type()) {
    case nlohmann::json::value_t::object: return "object";
    case nlohmann::json::value_t::array: return "array";
    case nlohmann::json::value_t::string: return "string";
    case nlohmann::json::value_t::boolean: return "boolean";
    case nlohmann::json::value_t::number_integer:
    case nlohmann::json::value_t::number_unsigned: return "integer";
    case nlohmann::json::value_t::number_float: return "number";
    case nlohmann::json::value_t::null: return "null";
    default: return "unknown";
  }
}

bool matches_type(const nlohmann::json& v, const std::string& type) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "integer") return v.is_number_integer() || v.is_number_unsigned();
  if (type == "number") return v.is_number();
  if (type == "null") return v.is_null();
  throw ValidationError("schema uses unsupported type name: " + type);
}

void check_schema(const nlohmann::json& doc, const nlohmann::json& schema,
                  const std::string& where) {
  if (!schema.is_object()) throw ValidationError("schema node must be an object at " + where);

  if (schema.count("type")) {
    const auto& t = schema.at("type");
    bool ok = false;
    if (t.is_string()) {
      ok = matches_type(doc, t.get<std::string>());
    } else {
      for (const auto& alt : t) ok = ok || matches_type(doc, alt.get<std::string>());
    }
    if (!ok)
      throw ValidationError("schema violation at " + where + ": expected type " + t.dump() +
                            ", got " + json_type_name(doc));
  }
  if (schema.count("enum")) {
    bool ok = false;
    for (const auto& alt : schema.at("enum")) ok = ok || doc == alt;
    if (!ok)
      throw ValidationError("schema violation at " + where + ": value " + doc.dump() +
                            " not in enum " + schema.at("enum").dump());
  }
  if (doc.is_object()) {
    if (schema.count("required"))
      for (const auto& key : schema.at("required"))
        if (!doc.count(key.get<std::string>()))
          throw ValidationError("schema violation at " + where + ": missing required key " +
                                key.get<std::string>());
    const auto* props = schema.count("properties") ? &schema.at("properties") : nullptr;
    for (const auto& item : doc.items()) {
      const std::string child = where + "/" + item.key();
      if (props && props->count(item.key())) {
        check_schema(item.value(), props->at(item.key()), child);
      } else if (schema.count("additionalProperties")) {
        const auto& extra = schema.at("additionalProperties");
        if (extra.is_boolean()) {
          if (!extra.get<bool>())
            throw ValidationError("schema violation at " + where + ": unexpected key " +
                                  item.key());
        } else {
          check_schema(item.value(), extra, child);
        }
      }
    }
  }
  if (doc.is_array() && schema.count("items")) {
    std::size_t i = 0;
    for (const auto& el : doc) {
      check_schema(el, schema.at("items"), where + "/" + std::to_string(i));
      ++i;
    }
  }
}

}  // namespace

void validate_with_schema(const nlohmann::json& doc, const nlohmann::json& schema) {
  check_schema(doc, schema, "#");
}

nlohmann::json summary_schema() {
  const auto string_map = [](nlohmann::json value_schema) {
    return nlohmann::json{{"type", "object"}, {"additionalProperties", std::move(value_schema)}};
  };
  const nlohmann::json path_string{{"type", "string"}};

  nlohmann::json artifacts{
      {"type", "object"},
      {"additionalProperties", false},
      {"properties",
       {{"preprocessed", string_map(path_string)},
        {"quality", string_map(path_string)},
        {"features", string_map(path_string)},
        {"correlation", string_map(path_string)},
        {"groups", path_string},
        {"groups_summary", path_string},
        {"classification", string_map(path_string)},
        {"report", path_string}}}};

  nlohmann::json quality_cell{
      {"type", "object"},
      {"additionalProperties", false},
      {"required", {"mean_ssim", "high_performance"}},
      {"properties",
       {{"mean_ssim", {{"type", "number"}}},
        {"high_performance", {{"type", "boolean"}}}}}};

  nlohmann::json classification_cell{
      {"type", "object"},
      {"additionalProperties", false},
      {"required", {"accuracy_mean", "accuracy_sd", "auc_mean", "auc_sd", "pooled_auc"}},
      {"properties",
       {{"accuracy_mean", {{"type", "number"}}},
        {"accuracy_sd", {{"type", "number"}}},
        {"auc_mean", {{"type", "number"}}},
        {"auc_sd", {{"type", "number"}}},
        {"pooled_auc", {{"type", "number"}}}}}};

  nlohmann::json schema{
      {"$schema", "http://json-schema.org/draft-07/schema#"},
      {"title", "radfid run summary"},
      {"type", "object"},
      {"additionalProperties", false},
      {"required", {"schema_version", "subcommand", "config", "networks", "stages", "artifacts"}},
      {"properties",
       {{"schema_version", {{"type", "integer"}, {"enum", {1}}}},
        {"subcommand",
         {{"type", "string"},
          {"enum", {"preprocess", "quality", "extract", "correlate", "group", "classify",
                    "report"}}}},
        {"config", {{"type", "object"}}},
        {"networks", {{"type", "array"}, {"items", {{"type", "string"}}}}},
        {"stages",
         {{"type", "array"},
          {"items",
           {{"type", "string"},
            {"enum",
             {"preprocess", "quality", "extract", "correlate", "group", "classify"}}}}}},
        {"artifacts", artifacts},
        {"quality", string_map(quality_cell)},
        {"group_sizes", {{"type", "array"}, {"items", {{"type", "integer"}}}}},
        {"classification", string_map(classification_cell)}}}};
  return schema;
}

}  // namespace radfid
