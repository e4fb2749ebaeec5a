#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "radfid/ml.hpp"
#include "radfid/quality.hpp"
#include "radfid/stats.hpp"
#include "radfid/table.hpp"

namespace radfid {

// Full pipeline configuration. Every field has a working default except the
// reference manifest and output directory, and the JSON form round-trips
// losslessly (to_json(from_json(j)) == j for fully specified j).
struct RunConfig {
  std::string subcommand = "report";  // how far to run, see run_pipeline
  std::filesystem::path reference_manifest;
  std::vector<std::pair<std::string, std::filesystem::path>> networks;
  std::filesystem::path out_dir;
  int n_bins = 32;
  double tau = 0.5;
  double ssim_cutoff = 0.85;
  double variance_target = 0.95;
  int n_trees = 100;
  int min_leaf = 2;
  int features_per_split = 0;  // 0 means ceil(sqrt(p))
  std::vector<int> depth_grid{2, 4, 8, 12};
  int n_repeats = 5;
  double val_fraction = 0.10;
  double test_fraction = 0.15;
  std::uint64_t seed = 0;
  int workers = 1;
};

nlohmann::json run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::json& j);

// A failure inside a pipeline stage; the CLI maps it to exit code 3 while
// plain ValidationError (bad config or arguments) maps to exit code 2.
struct StageError : std::runtime_error {
  std::string stage;
  StageError(std::string stage_name, const std::string& message)
      : std::runtime_error("[" + stage_name + "] " + message), stage(std::move(stage_name)) {}
};

// What one pipeline run produced. Paths are relative to the output
// directory; maps key by cohort name ("reference" or a network name).
struct RunArtifacts {
  std::vector<std::string> stages_run;
  std::vector<std::pair<std::string, std::string>> preprocessed;
  std::vector<std::pair<std::string, std::string>> quality_csv;
  std::vector<std::pair<std::string, std::string>> feature_csv;
  std::vector<std::pair<std::string, std::string>> correlation_csv;
  std::string groups_json;
  std::string groups_summary_csv;
  std::vector<std::pair<std::string, std::string>> classification_json;
  std::string report_md;
  std::string summary_json;

  std::vector<NetworkProfile> profiles;   // filled when quality ran
  GroupAssignment groups;                 // filled when group ran
};

// Runs the stage chain the subcommand asks for:
//   preprocess -> preprocess (materializes normalized cohorts)
//   quality    -> quality
//   extract    -> extract
//   correlate  -> extract, correlate
//   group      -> quality, extract, correlate, group
//   classify   -> extract, classify
//   report     -> all of the above
// Volumes are min-max normalized to [0,1] at load time. Every stage writes
// its artifacts under config.out_dir; a summary JSON naming every produced
// file and a markdown report covering the stages that ran are always
// written. Failures surface as StageError tagged with the consuming stage;
// the out directory keeps a run.partial marker until the run completes, and
// interrupted files are left as *.partial. Artifact bytes are identical
// across reruns and worker counts; the markdown header timestamp is the one
// exception.
RunArtifacts run_pipeline(const RunConfig& config);

// Helpers shared by the pipeline, the CLI, and tests.

// Writes path atomically: content goes to path.partial, then a rename.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

// Rows case_id,mae,mse,psnr_db,ssim plus a final mean±sd row. The psnr
// column aggregates finite entries only and prints inf±0 when every case
// is exact.
void write_quality_csv(const std::filesystem::path& path,
                       const std::vector<std::string>& case_ids,
                       const std::vector<QualityReport>& reports);

nlohmann::json group_assignment_to_json(const GroupAssignment& groups,
                                        const std::vector<NetworkProfile>& profiles,
                                        double ssim_cutoff);
nlohmann::json classification_report_to_json(const ClassificationReport& report);

// Minimal JSON Schema checker covering the subset the published schema
// uses: type (string or list), properties, required, additionalProperties
// (bool or schema), items, enum. Throws ValidationError with a JSON-pointer
// style location on the first violation.
void validate_with_schema(const nlohmann::json& doc, const nlohmann::json& schema);

// The schema document that `summary.json` must satisfy; also published at
// docs/summary.schema.json.
nlohmann::json summary_schema();

}  // namespace radfid
